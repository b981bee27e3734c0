#!/usr/bin/env python3
from pathlib import Path

from pip._internal.network.session import PipSession
from pip._internal.req import parse_requirements
from setuptools import setup

EXTRAS = {"test", "docs"}

pattern = "requirements/*.txt"
requirements_files = Path(__file__).parent.glob(pattern)

session = PipSession()
requirements = {
    each.stem: list(
        i.requirement for i in parse_requirements(str(each), session=session)
    )
    for each in requirements_files
}

install_requires = requirements.pop("default", [])
extras_require = {ext: requirements[ext] for ext in EXTRAS}

if __name__ == "__main__":
    setup(
        # PEP-561: https://www.python.org/dev/peps/pep-0561/
        include_package_data=True,
        install_requires=install_requires,
        extras_require=extras_require,
    )
