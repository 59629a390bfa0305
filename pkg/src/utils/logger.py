import sys
import logging

LOGGER_NAME = "boostdag"
_LOG_FORMAT = "%(asctime)s %(levelname)s %(processName)s %(message)s"

_logger = logging.getLogger(LOGGER_NAME)


def init_logging(level=logging.INFO, filename=None):
    """Route package logs to stderr and, optionally, to a log file
    :params:
        + level     - logging level or its name, i.e. "DEBUG"
        + filename  - extra log file, None to skip
    Returns
        the package logger
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    for handler in list(_logger.handlers):
        _logger.removeHandler(handler)
        handler.close()
    formatter = logging.Formatter(_LOG_FORMAT)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    _logger.addHandler(stream)
    if filename is not None:
        file_handler = logging.FileHandler(filename)
        file_handler.setFormatter(formatter)
        _logger.addHandler(file_handler)
    _logger.setLevel(level)
    _logger.propagate = False
    return _logger


def _format(log_msg, caller_frame):
    log_str = "".join(str(i) for i in log_msg)
    filename = caller_frame.f_code.co_filename.rsplit("/", 1)[-1]
    line_no = caller_frame.f_lineno
    func_name = caller_frame.f_code.co_name
    return "[" + filename + ":" + str(line_no) + " " + func_name + "] " + log_str


def log_error(*log_msg):
    """Record error level log
    Args:
        *log_msg: message fragments, joined without separator
    """
    if _logger.isEnabledFor(logging.ERROR):
        _logger.error(_format(log_msg, sys._getframe().f_back))


def log_warning(*log_msg):
    """Record warning level log
    Args:
        *log_msg: message fragments, joined without separator
    """
    if _logger.isEnabledFor(logging.WARNING):
        _logger.warning(_format(log_msg, sys._getframe().f_back))


def log_info(*log_msg):
    """Record info level log
    Args:
        *log_msg: message fragments, joined without separator
    """
    if _logger.isEnabledFor(logging.INFO):
        _logger.info(_format(log_msg, sys._getframe().f_back))


def log_debug(*log_msg):
    # guarded: called once per boosting iteration
    if _logger.isEnabledFor(logging.DEBUG):
        _logger.debug(_format(log_msg, sys._getframe().f_back))
