class AeroCellException(Exception):
    pass


class AeroCellValidationException(AeroCellException):
    pass


class TraceFormatException(AeroCellValidationException):

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__('line {0}: {1}'.format(line, reason))


class SeriesTooShortException(AeroCellValidationException):
    pass


class AeroCellIOException(AeroCellException):
    pass


class PipelineStageException(AeroCellException):

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__('stage "{0}" failed: {1}'.format(stage, cause))
