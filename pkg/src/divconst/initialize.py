from pathlib import Path

from .config_utils import PathConfig
from .logger_utils import LoggingAgent


class Initializer:

    def __init__(self):
        self.config = PathConfig()
        self.logger = LoggingAgent("Initializer").logger

        self.base_dir = self.config.base_dir
        self.log_dir = self.config.log_dir_path
        self.cache_dir = self.config.cache_dir_path

    def create_dirs(self) -> list[Path]:
        """Create the base, log and cache directories; returns the ones created."""
        return self._create_dirs([self.base_dir, self.log_dir, self.cache_dir])

    def _create_dirs(self, dirs: list[Path]) -> list[Path]:
        created = []
        for dir in dirs:
            if not dir.exists():
                dir.mkdir(parents=True, exist_ok=True)
                self.logger.info(f"Created directory: {dir}")
                created.append(dir)
            else:
                self.logger.debug(f"Directory already exists: {dir}")
        return created
