"""
Log setup for the command line tools.
"""

import logging
import shellish.logging

LOG_FORMAT = ' '.join((
    '[%(name)s]',
    '[%(levelname)s]',
    '%(message)s'
))
LEVELS = 'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'


def configure(level='WARNING', stream=None):
    """ Route the package loggers through a single tty aware handler.
    Calling it again only changes the level. """
    if isinstance(level, str):
        level = level.upper()
        if level not in LEVELS:
            raise ValueError('Invalid log level: %s' % level)
    logger = logging.getLogger('tracerules')
    logger.setLevel(level)
    if not any(isinstance(x, shellish.logging.VTMLHandler)
               for x in logger.handlers):
        handler = shellish.logging.VTMLHandler(stream, fmt=LOG_FORMAT)
        logger.addHandler(handler)
        logger.propagate = False
    return logger
