"""
Exception types shared by the tracerules modules.
"""


class TraceRulesError(Exception):
    """ Base for every error raised on purpose by this package. """
    pass


class DataError(TraceRulesError, ValueError):
    """ Input data (a file, a corpus, a config) is unusable.  The optional
    `path` and `line_no` are used to render compiler style diagnostics. """

    def __init__(self, message, path=None, line_no=None):
        self.message = message
        self.path = path
        self.line_no = line_no
        super().__init__(message)

    def __str__(self):
        if self.path is None:
            return self.message
        if self.line_no is None:
            return '%s: %s' % (self.path, self.message)
        return '%s:%d: %s' % (self.path, self.line_no, self.message)


class MalformedLine(DataError):
    """ A record could not be parsed at all. """
    pass


class SchemaViolation(DataError):
    """ A record parsed but a field is missing, mistyped or inconsistent. """

    def __init__(self, message, path=None, line_no=None, field=None):
        self.field = field
        super().__init__(message, path=path, line_no=line_no)


class EmptyCorpus(DataError):
    pass


class FieldAbsent(TraceRulesError, LookupError):
    """ No event of the trace carries the field. """

    def __init__(self, field):
        self.field = field
        super().__init__('Field not present in trace: %s' % field)


class NotEmittable(TraceRulesError, ValueError):
    pass


class DuplicateRuleId(DataError):
    pass


class TimestampRegression(DataError):
    """ An event is older than the stream read so far. """
    pass


class InvalidConfig(DataError):
    pass


class UnknownTarget(DataError):
    pass


class UnsortedAlerts(DataError):
    pass


class EmptySet(DataError):
    pass
