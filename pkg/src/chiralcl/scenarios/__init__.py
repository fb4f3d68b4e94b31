"""Bundled figure-reproduction scenario files."""

from importlib import resources

from ..scenario import parse_scenario


def scenario_names():
    pkg = resources.files(__name__)
    return sorted(p.name[:-4] for p in pkg.iterdir()
                  if p.name.endswith(".scn"))


def load_scenario_text(name: str) -> str:
    return (resources.files(__name__) / f"{name}.scn").read_text()


def load_scenario(name: str):
    return parse_scenario(load_scenario_text(name))
