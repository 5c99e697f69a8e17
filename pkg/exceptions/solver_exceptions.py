""" Custom exceptions for the elasticity model and eigensolver. """


class SolverError(Exception):
    """ Base class for assembly and eigensolver errors """


class SingularMaterial(SolverError):
    """ Poisson ratio makes the Lame constants singular """

    def __init__(self, poisson_ratio, *args):
        super().__init__(args)
        self.poisson_ratio = poisson_ratio


    def __str__(self):
        return f'Solver Exception: Lame constants are singular for '\
            f'Poisson ratio {self.poisson_ratio} (must satisfy -1 < nu < 0.5).'


class AssemblyError(SolverError):
    """ Element with a non-positive Jacobian """

    def __init__(self, element, *args):
        super().__init__(args)
        self.element = element


    def __str__(self):
        return f'Solver Exception: Element {self.element} has a '\
            'non-positive Jacobian.'


class BlochError(SolverError):
    """ Inconsistent Bloch wavevector or periodic maps """

    def __init__(self, reason, *args):
        super().__init__(args)
        self.reason = reason


    def __str__(self):
        return f'Solver Exception: Bloch condition error: {self.reason}'


class ShiftFactorizationError(SolverError):
    """ K - sigma^2 M could not be factorized """

    def __init__(self, shift_hz, *args):
        super().__init__(args)
        self.shift_hz = shift_hz


    def __str__(self):
        return f'Solver Exception: Factorization failed at shift '\
            f'{self.shift_hz / 1e9:.6f} GHz; the shift is probably an '\
            'eigenvalue. Retry with a slightly different shift.'


class ConvergenceError(SolverError):
    """ Eigenpairs did not reach the requested tolerance """

    def __init__(self, residuals, tol, *args):
        super().__init__(args)
        self.residuals = list(residuals)
        self.tol = tol


    def __str__(self):
        worst = max(self.residuals) if self.residuals else float('nan')
        return f'Solver Exception: Eigensolver did not converge '\
            f'(worst residual {worst:.3e} > tol {self.tol:.1e}).'


class TooManyModes(SolverError):
    """ More modes requested than degrees of freedom """

    def __init__(self, requested, available, *args):
        super().__init__(args)
        self.requested = requested
        self.available = available


    def __str__(self):
        return f'Solver Exception: Requested {self.requested} modes but '\
            f'the problem only has {self.available} degrees of freedom.'
