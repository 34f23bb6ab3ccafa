"""Exception types shared across the package."""


class ModelError(Exception):
    """Base class for model construction and sampling failures."""


class ParameterError(ModelError, ValueError):
    """A model or configuration parameter is outside its valid range."""


class ClassHypothesisError(ModelError):
    """An operation was applied to a model outside the class it requires."""


class UnknownFamilyError(ModelError):
    """No model family is registered under the requested name."""


class ConfigError(Exception):
    """Malformed experiment configuration.

    ``line`` is the 1-based line in the config file, when known.
    """

    def __init__(self, message, line=None, path=None):
        self.message = message
        self.line = line
        self.path = path
        super().__init__(self.__str__())

    def __str__(self):
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
        if self.line is not None:
            where += f"{self.line}:"
        return f"{where} {self.message}" if where else self.message
