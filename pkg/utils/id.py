import re

from utils.console import print_substep


def id(name: str) -> str:
    """
    This function turns a run name into a directory-safe run id
    """
    id = re.sub(r"[^\w\s-]", "", name).strip().replace(" ", "_")
    print_substep(f"Run ID is {id}", style="bold blue")
    return id
