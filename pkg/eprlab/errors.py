class EprLabError(Exception):
    exit_code = 1


class ConfigurationError(EprLabError):
    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericOverflowError(EprLabError):
    def __init__(self, message, step=None, state=None):
        self.step = step
        self.state = state
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class UnsupportedModelError(EprLabError):
    pass


class AvailabilityError(EprLabError):
    pass


class EmptyPathError(EprLabError):
    pass


class InsufficientSampleError(EprLabError):
    def __init__(self, message, required=None, got=None):
        self.required = required
        self.got = got
        if required is not None:
            message = f"{message} (need {required}, got {got})"
        super().__init__(message)


class DegenerateLimitError(EprLabError):
    pass


class HorizonError(EprLabError):
    pass


class ParameterError(EprLabError):
    pass


class InputError(EprLabError):
    pass
