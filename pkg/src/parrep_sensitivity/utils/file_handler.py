"""
File I/O utilities for configs, network documents and reports.
"""

from pathlib import Path
from typing import List, Optional


class FileHandler:
    """
    Utility class for file operations.

    Provides text I/O with consistent error handling and output directory
    management.
    """

    @staticmethod
    def read_text(file_path: Path) -> str:
        """
        Read a UTF-8 text file.

        Raises:
            FileNotFoundError: If file doesn't exist
            IOError: If file cannot be read
        """
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        try:
            return file_path.read_text(encoding="utf-8")
        except Exception as e:
            raise IOError(f"Failed to read file: {e}") from e

    @staticmethod
    def write_text(file_path: Path, text: str) -> Path:
        """
        Write a UTF-8 text file, creating parent directories.

        Returns:
            The written path

        Raises:
            IOError: If file cannot be written
        """
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            # newline="" keeps the bytes identical across platforms
            with open(file_path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            return file_path
        except Exception as e:
            raise IOError(f"Failed to write file: {e}") from e

    @staticmethod
    def find_files(directory: Path, extensions: Optional[List[str]] = None) -> List[Path]:
        """
        Find config documents in a directory (non-recursive).

        Args:
            directory: Directory to search
            extensions: Suffixes to match; defaults to .cfg, .yaml and .yml

        Raises:
            NotADirectoryError: If path is not a directory
        """
        if not directory.is_dir():
            raise NotADirectoryError(f"Not a directory: {directory}")

        if extensions is None:
            extensions = [".cfg", ".yaml", ".yml"]

        found: List[Path] = []
        for ext in extensions:
            found.extend(directory.glob(f"*{ext}"))
        return sorted(set(found))
