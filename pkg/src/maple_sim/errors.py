"""Exception hierarchy shared by every layer of the simulator."""


class MapleSimError(Exception):
    """Base class for all errors raised by maple_sim."""


class ParseError(MapleSimError):
    pass


class BoundsError(MapleSimError, IndexError):
    pass


class UnsupportedError(MapleSimError):
    pass


class CapacityError(MapleSimError):
    pass


class ShapeError(MapleSimError, ValueError):
    pass


class ConfigError(MapleSimError, ValueError):
    pass


class TableError(MapleSimError, ValueError):
    pass


class ComparisonError(MapleSimError):
    pass


class IoError(MapleSimError, OSError):
    """Raised when a report or input file cannot be read or written."""
