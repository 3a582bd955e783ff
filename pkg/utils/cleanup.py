import os
import shutil
from os.path import exists


def _listdir(d):  # listdir with full path
    return [os.path.join(d, f) for f in os.listdir(d)]


def cleanup(run_directory) -> int:
    """Deletes the artifacts of an earlier run with the same id.

    Returns:
        int: How many entries were deleted
    """
    if not exists(run_directory):
        return 0
    entries = _listdir(run_directory)
    for entry in entries:
        if os.path.isdir(entry):
            shutil.rmtree(entry)
        else:
            os.remove(entry)
    return len(entries)
