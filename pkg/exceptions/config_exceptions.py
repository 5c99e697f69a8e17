""" Custom exceptions for run configuration and artifacts. """


class ConfigError(Exception):
    """ Bad configuration key or value """

    def __init__(self, key, reason, *args):
        super().__init__(args)
        self.key = key
        self.reason = reason


    def __str__(self):
        return f'Config Exception: {self.key}: {self.reason}'


class ArtifactMismatch(Exception):
    """ Artifact file does not match the requested plot kind """

    def __init__(self, kind, path, *args):
        super().__init__(args)
        self.kind = kind
        self.path = path


    def __str__(self):
        return f'Config Exception: {self.path} is not a valid '\
            f'{self.kind} artifact.'
