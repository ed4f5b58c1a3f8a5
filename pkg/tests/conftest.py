import os.path

ASSETS = os.path.join(os.path.dirname(__file__), "..", "assets")


def asset(name: str) -> str:
    return os.path.join(ASSETS, name)
