"""Exception types raised across the package."""


class LevelsyncError(Exception):
    pass


class LevelFormatError(LevelsyncError, ValueError):
    pass


class UnknownTile(LevelFormatError):
    def __init__(self, char, row, col):
        self.char, self.row, self.col = char, row, col
        super().__init__(f"unknown tile {char!r} at row {row}, col {col}")


class BadDimensions(LevelFormatError):
    def __init__(self, rows, cols):
        self.rows, self.cols = rows, cols
        super().__init__(f"bad level dimensions: {rows} rows x {cols} cols")


class AudioError(LevelsyncError, ValueError):
    pass


class NotWav(AudioError):
    pass


class UnsupportedEncoding(AudioError):
    def __init__(self, format_code, bits=None):
        self.format_code, self.bits = format_code, bits
        msg = f"unsupported WAV encoding: format code 0x{format_code:04x}"
        if bits is not None:
            msg += f", {bits} bits"
        super().__init__(msg)


class TruncatedData(AudioError):
    pass


class EmptyClip(AudioError):
    pass


class NoStandableStart(LevelsyncError):
    """The left edge offers nowhere to stand; the segment is malformed."""


class InfeasibleTarget(LevelsyncError, ValueError):
    pass


class StaleObservation(LevelsyncError, ValueError):
    pass


class EmptyRun(LevelsyncError, ValueError):
    pass


class TooFewSegments(LevelsyncError, ValueError):
    pass


class ConfigError(LevelsyncError, ValueError):
    pass


class FallbackOveruse(UserWarning):
    """Too many segments fell back to the guaranteed-playable layout."""
