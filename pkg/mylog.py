import logging
import os
import sys


def get_logger(
    name,
    level=None,
    console=True,
    logfile=None,
    fmt="%(asctime)s %(levelname)s %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
):
    """Return a logger writing to stderr (and optionally a file).

    level defaults to $LOGLEVEL (or WARNING) and logfile to $MISLIN_LOGFILE,
    so the CLI can be made chatty without touching code. Reports go to
    stdout; nothing here ever writes there.
    """
    log = logging.getLogger(name)
    if level is None:
        level = os.environ.get('LOGLEVEL', 'WARNING')
    log.setLevel(level.upper() if isinstance(level, str) else level)
    log.propagate = False

    if log.handlers:
        return log

    formatter = logging.Formatter(fmt, datefmt=datefmt)

    if console:
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(formatter)
        log.addHandler(h)

    logfile = logfile or os.environ.get('MISLIN_LOGFILE')
    if logfile:
        h = logging.FileHandler(os.path.expanduser(logfile))
        h.setFormatter(formatter)
        log.addHandler(h)

    return log


def set_level(level):
    """Change the level of every logger created through get_logger."""
    for obj in list(logging.root.manager.loggerDict.values()):
        if isinstance(obj, logging.Logger) and not obj.propagate:
            obj.setLevel(level.upper() if isinstance(level, str) else level)
