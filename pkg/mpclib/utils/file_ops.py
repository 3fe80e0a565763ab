from __future__ import annotations

import os


def guarantee_existence(path: str) -> str:
    if not os.path.exists(path):
        os.makedirs(path)
    return os.path.abspath(path)


def guarantee_parent(file_path: str) -> str:
    """Creates the directory holding file_path if needed."""
    parent = os.path.dirname(os.path.abspath(file_path))
    guarantee_existence(parent)
    return file_path
