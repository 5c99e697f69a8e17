""" Custom exceptions for the network model. """


class NetworkSpecError(Exception):
    """ Invalid network description """

    def __init__(self, reason, *args):
        super().__init__(args)
        self.reason = reason


    def __str__(self):
        return f'Network Exception: {self.reason}'


class LayoutError(Exception):
    """ Non-adjacent components overlap in the lattice layout """

    def __init__(self, components, *args):
        super().__init__(args)
        self.components = list(components)


    def __str__(self):
        pairs = '; '.join(f'{a} / {b}' for a, b in self.components[:5])
        return f'Network Exception: {len(self.components)} overlapping '\
            f'component pair(s): {pairs}'
