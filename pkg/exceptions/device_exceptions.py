""" Custom exceptions for the device model. """


class TuningError(Exception):
    """ No mode crosses the target frequency in the length range """

    def __init__(self, f_target, nearest, *args):
        super().__init__(args)
        self.f_target = f_target
        # (length_m, frequency_hz) of the closest approach
        self.nearest = nearest


    def __str__(self):
        length, freq = self.nearest
        return f'Device Exception: No waveguide mode reaches '\
            f'{self.f_target / 1e9:.6f} GHz in the length range; nearest '\
            f'approach {freq / 1e9:.6f} GHz at L = {length * 1e6:.3f} um.'


class TripletError(Exception):
    """ Fewer than three coupled-mode candidates """

    def __init__(self, found, *args):
        super().__init__(args)
        self.found = list(found)


    def __str__(self):
        freqs = ', '.join(f'{f / 1e9:.6f}' for f in self.found)
        return f'Device Exception: Need 3 coupled normal modes, found '\
            f'{len(self.found)}: [{freqs}] GHz'


class SingleModeApproximationError(Exception):
    """ Negative radicand when extracting the coupling rate """

    def __init__(self, radicand, *args):
        super().__init__(args)
        self.radicand = radicand


    def __str__(self):
        return f'Device Exception: (w+ - w-)^2 - Delta^2 = '\
            f'{self.radicand:.4e} Hz^2 is negative; the single-mode '\
            'waveguide approximation is not valid for this triplet.'
