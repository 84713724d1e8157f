import logging
import os

FILE_FORMAT = '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'
CONSOLE_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

_configured = False


def configure_root_logger(level='INFO', log_dir='logs', console_stream=None):
    """
    Install the file and console handlers on the root logger (once per process)

    :param level: logging level name or number
    :param log_dir: directory for orba.log; None disables the file handler
    :param console_stream: stream for the console handler (stderr by default)
    """
    global _configured
    root = logging.getLogger()
    root.setLevel(level if isinstance(level, int) else level.upper())
    if _configured:
        return root

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.FileHandler(os.path.join(log_dir, 'orba.log'))
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        root.addHandler(file_handler)

    console_handler = logging.StreamHandler(console_stream)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    root.addHandler(console_handler)

    _configured = True
    return root
