class LayoutError(Exception):
    """ Base class of all errors raised by `logical_layout`. """
    def __init__(self, msg):
        self.message = msg

    def __str__(self):
        return self.message


class AltoParseError(LayoutError):
    def __init__(self, msg, offset=None, line=None):
        self.offset = offset
        self.line = line
        location = []
        if line is not None:
            location.append("line {}".format(line))
        if offset is not None:
            location.append("byte offset {}".format(offset))
        if location:
            msg = "{} ({})".format(msg, ", ".join(location))
        super().__init__(msg)


class EmptyDocumentError(LayoutError):
    def __init__(self, msg="The document contains no text lines."):
        super().__init__(msg)


class IncompleteAnnotationError(LayoutError):
    def __init__(self, element_ids):
        self.element_ids = list(element_ids)
        super().__init__("The following elements carry no label: {}".format(", ".join(self.element_ids)))


class RuleDefinitionError(LayoutError):
    def __init__(self, msg, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        if line is not None:
            prefix = "{}:{}:{}".format(source or "<rules>", line, column if column is not None else 1)
            msg = "{}: {}".format(prefix, msg)
        super().__init__(msg)


class FeatureMissingError(LayoutError):
    def __init__(self, feature):
        self.feature = feature
        super().__init__("The feature '{}' is not available.".format(feature))


class ConfigError(LayoutError):
    pass


class TrainingDataError(LayoutError):
    pass


class PredictionFormatError(LayoutError):
    def __init__(self, msg, row=None, path=None):
        self.row = row
        self.path = path
        if row is not None:
            msg = "{}, row {}: {}".format(path or "<predictions>", row, msg)
        super().__init__(msg)


class IdMismatchError(LayoutError):
    def __init__(self, missing, unexpected):
        self.missing = sorted(missing)
        self.unexpected = sorted(unexpected)
        parts = []
        if self.missing:
            parts.append("missing predictions for {}".format(_format_keys(self.missing)))
        if self.unexpected:
            parts.append("predictions without ground truth for {}".format(_format_keys(self.unexpected)))
        super().__init__("Predictions and ground truth cover different elements: " + "; ".join(parts))


class TruthMismatchError(LayoutError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("Reports were computed on different ground truths: {}".format(", ".join(self.names)))


def _format_keys(keys, limit=10):
    shown = ["/".join(str(part) for part in key) if isinstance(key, tuple) else str(key) for key in keys[:limit]]
    if len(keys) > limit:
        shown.append("... ({} more)".format(len(keys) - limit))
    return ", ".join(shown)
