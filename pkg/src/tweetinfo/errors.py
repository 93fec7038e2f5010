"""Exception hierarchy shared by all modules.

Plain argument errors (bad lengths, out-of-range scalars) raise ``ValueError``;
the classes below cover failures tied to files, configuration and training.
"""


class TweetInfoError(Exception):
    """Base class for toolkit errors."""


class ParseError(TweetInfoError, ValueError):
    """A data file line does not follow the expected schema."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class LabelError(ParseError):
    """A label string is not INFORMATIVE or UNINFORMATIVE."""


class MissingLabelError(ParseError):
    """A labeled split contains a line without a label."""


class ConfigurationError(TweetInfoError, ValueError):
    """Invalid configuration, parameter shapes, or checkpoint contents."""


class CheckpointError(ConfigurationError):
    """A checkpoint file is corrupted or has an unsupported format version."""


class AlignmentError(TweetInfoError, ValueError):
    """Files that must share ids in the same order do not."""


class JoinError(TweetInfoError, ValueError):
    """Gold and predicted files cannot be joined on id."""


class ProbabilityError(TweetInfoError, ValueError):
    """A probability row violates the non-negative, sums-to-one contract."""


class DivergedError(TweetInfoError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)
