""" Custom exceptions for the geometry model.

    Raised while building boundary representations of
    waveguides, resonators, shield cells and assemblies.
"""


class GeometryError(Exception):
    """ Base class for geometry errors """


class InvalidSpec(GeometryError):
    """ A device spec violates one of its invariants """

    def __init__(self, spec_name, invariant, *args):
        super().__init__(args)
        self.spec_name = spec_name
        self.invariant = invariant


    def __str__(self):
        return f'Geometry Exception: {self.spec_name} violates '\
            f'invariant: {self.invariant}'


class InvalidRegion(GeometryError):
    """ A polygon region is not simple, oriented or nested """

    def __init__(self, reason, location=None, *args):
        super().__init__(args)
        self.reason = reason
        self.location = location


    def __str__(self):
        msg = f'Geometry Exception: Invalid region: {self.reason}'
        if self.location is not None:
            msg += f' near ({self.location[0]:.6g}, {self.location[1]:.6g}) m'
        return msg


class DisconnectedAssembly(GeometryError):
    """ Components of an assembly do not overlap """

    def __init__(self, parts, *args):
        super().__init__(args)
        self.parts = parts


    def __str__(self):
        return f'Geometry Exception: Assembly falls apart into '\
            f'{self.parts} disconnected pieces.'
