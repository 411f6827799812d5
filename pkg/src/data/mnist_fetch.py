"""MNIST download from a mirror with retry."""

import gzip
import os
from typing import Dict, Optional

import requests
from tenacity import retry, stop_after_attempt, wait_exponential

from src.data.defaults import (
    DATA_DIR_ENV,
    DEFAULT_DATA_DIR,
    DEFAULT_MNIST_MIRROR,
    MNIST_FILES,
    MNIST_MIRROR_ENV,
)


class MnistFetcher:
    """Downloads the four gzipped IDX files and stores them uncompressed."""

    def __init__(self, dest: Optional[str] = None, mirror: Optional[str] = None, logger=None):
        """Initialize fetcher.

        Args:
            dest: Target directory (defaults to $SCREENER_DATA_DIR or data/mnist)
            mirror: Base URL (defaults to $MNIST_MIRROR_URL or the public mirror)
            logger: Optional StructuredLogger
        """
        self.dest = dest or os.getenv(DATA_DIR_ENV, DEFAULT_DATA_DIR)
        self.mirror = mirror or os.getenv(MNIST_MIRROR_ENV, DEFAULT_MNIST_MIRROR)
        if not self.mirror.endswith("/"):
            self.mirror += "/"
        self.logger = logger

    @retry(stop=stop_after_attempt(3), wait=wait_exponential(min=2, max=10))
    def download(self, name: str) -> bytes:
        """Fetch ``<mirror>/<name>.gz`` and return the decompressed bytes."""
        url = f"{self.mirror}{name}.gz"
        if self.logger:
            self.logger.info("Downloading MNIST file", url=url)
        response = requests.get(url, timeout=60)
        response.raise_for_status()
        return gzip.decompress(response.content)

    def fetch(self, overwrite: bool = False) -> Dict[str, str]:
        """Download every missing file.

        Returns:
            Dict of file key -> local path
        """
        os.makedirs(self.dest, exist_ok=True)
        paths = {}
        for key, name in MNIST_FILES.items():
            path = os.path.join(self.dest, name)
            paths[key] = path
            if os.path.exists(path) and not overwrite:
                if self.logger:
                    self.logger.info("MNIST file already present", path=path)
                continue
            try:
                data = self.download(name)
            except Exception as e:
                if self.logger:
                    self.logger.error(f"MNIST download failed: {str(e)}", file=name)
                raise
            with open(path, "wb") as f:
                f.write(data)
            if self.logger:
                self.logger.info("MNIST file saved", path=path, size=len(data))
        return paths
