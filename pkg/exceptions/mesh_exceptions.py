""" Custom exceptions for the mesh model. """


class MeshError(Exception):
    """ Base class for meshing errors """


class UnmeshableRegion(MeshError):
    """ The mesher could not produce a valid mesh """

    def __init__(self, reason, location=None, *args):
        super().__init__(args)
        self.reason = reason
        self.location = location


    def __str__(self):
        msg = f'Mesh Exception: Cannot mesh region: {self.reason}'
        if self.location is not None:
            msg += f' near ({self.location[0]:.6g}, {self.location[1]:.6g}) m'
        return msg


class PeriodicPairingError(MeshError):
    """ Periodic boundary nodes do not match one-to-one """

    def __init__(self, unmatched, *args):
        super().__init__(args)
        self.unmatched = list(unmatched)


    def __str__(self):
        shown = ', '.join(f'({x:.6g}, {y:.6g})' for x, y in self.unmatched[:5])
        extra = len(self.unmatched) - 5
        if extra > 0:
            shown += f' and {extra} more'
        return f'Mesh Exception: {len(self.unmatched)} unmatched periodic '\
            f'node(s): {shown}'
