"""
 Usage example
  logging_agent = LoggingAgent(agent_name="Estimator")
  logger = logging_agent.logger
  logger.info("This is a log message.")
"""

import sys

from loguru import logger as loguru_logger

from .config_utils import PathConfig, RootConfig, log_level

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | <cyan>{extra[agent]}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {extra[agent]} - {message}"


class LoggingAgent:
    """
    LoggingAgent hands out loguru loggers bound to an agent name.

    Sinks are installed once per process: stderr always (stdout carries the
    CLI documents), and a rotating file in the configured log directory when
    CONFIG_PATH points at a YAML config.

    Attributes:
    - agent_name (str): name bound into every record as ``extra["agent"]``.
    """

    _configured = False

    def __init__(self, agent_name: str):
        self.agent_name = agent_name
        if not LoggingAgent._configured:
            self._configure_sinks()
        self._logger = loguru_logger.bind(agent=agent_name)

    @property
    def logger(self):
        return self._logger

    @classmethod
    def reset(cls) -> None:
        """Forget installed sinks so the next agent re-reads the configuration."""
        cls._configured = False

    @classmethod
    def _configure_sinks(cls) -> None:
        level = log_level()
        loguru_logger.remove()
        loguru_logger.configure(extra={"agent": "divconst"})
        loguru_logger.add(sys.stderr, level=level, format=CONSOLE_FORMAT)

        if RootConfig.is_configured():
            log_dir = PathConfig().log_dir_path
            log_dir.mkdir(parents=True, exist_ok=True)
            loguru_logger.add(
                log_dir / "divconst.log",
                level=level,
                format=FILE_FORMAT,
                rotation="10 MB",
                retention="30 days",
                enqueue=True,
                encoding="utf-8",
            )
        cls._configured = True
