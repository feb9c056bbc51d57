import os
import logging
import colorlog

_LOG_COLORS = {
    'DEBUG':    'cyan',
    'INFO':     'white',
    'WARNING':  'yellow',
    'ERROR':    'red',
    'CRITICAL': 'red,bg_white',
}


def setup_logging(name: str) -> logging.Logger:
    """
    Setup logging with one colored console handler shared by every simulator module.

    Args:
        name: The name of the logger, typically __name__

    Returns:
        A configured logger instance
    """
    root_logger = logging.getLogger()

    # Only install the handler once, worker processes call this again on import
    if not any(getattr(handler, '_hetnet', False) for handler in root_logger.handlers):
        for handler in list(root_logger.handlers):
            root_logger.removeHandler(handler)

        formatter = colorlog.ColoredFormatter(
            "%(log_color)s[%(asctime)s][%(name)s] %(levelname)s %(message)s",
            datefmt='%H:%M:%S',
            log_colors=_LOG_COLORS,
            style='%'
        )
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        console_handler._hetnet = True
        root_logger.addHandler(console_handler)

    level_name = os.getenv('LOG_LEVEL', 'INFO').upper()
    root_logger.setLevel(getattr(logging, level_name, logging.INFO))

    return logging.getLogger(name)
