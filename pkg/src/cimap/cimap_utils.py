"""
General cimap package utilities
"""

import inspect
import os
import platform
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Dict, List, Tuple

import psutil

import cimap

from .engine import DEFAULT_MAX_STATES, run_kernels
from .kernels.numba_kernel import MEMO_BYTES, numba_available

DEPENDENCIES = (('NumPy', 'numpy'), ('SciPy', 'scipy'), ('pandas', 'pandas'),
                ('NetworkX', 'networkx'), ('psutil', 'psutil'), ('Numba', 'numba'))


def _short_path(path: Path, obscure: bool) -> str:
    if obscure:
        try:
            return str('~' / path.relative_to(Path.home()))
        except ValueError:
            pass
    return str(path)


def _dist_version(dist: str) -> str:
    try:
        return version(dist)
    except PackageNotFoundError:
        return "not installed"


def environment_info(obscure_paths: bool = True) -> Dict[str, List[Tuple[str, str]]]:
    """
    Collect the fields printed by :func:`about`, grouped by section.

    Sections are `cimap` (version, install path and the run kernels), `Dependencies`
    and `System` (interpreter and the memory the image and memo checks draw on).
    """
    install = Path(inspect.getsourcefile(cimap)).parent  # type: ignore[arg-type]
    kernels = ", ".join(k for k in run_kernels if k != 'numba' or numba_available)
    mem = psutil.virtual_memory()
    return {
        'cimap': [('cimap Version', cimap.__version__),
                  ('Installation Path', _short_path(install, obscure_paths)),
                  ('Run Kernels', kernels),
                  ('Auto Kernel', 'numba' if numba_available else 'numpy'),
                  ('Max States', str(DEFAULT_MAX_STATES)),
                  ('Memo Budget', f"{MEMO_BYTES/1024**2:.0f} MiB")],
        'Dependencies': [(f'{label} Version', _dist_version(dist))
                         for label, dist in DEPENDENCIES],
        'System': [('Python Version', platform.python_version()),
                   ('Python Install Path',
                    _short_path(Path(sys.executable).parent, obscure_paths)),
                   ('Platform Info', f"{platform.system()} ({platform.machine()})"),
                   ('CPU Count', str(os.cpu_count())),
                   ('Total System Memory', f"{mem.total/1024**3:.0f} GB"),
                   ('Available Memory', f"{mem.available/1024**3:.1f} GB")],
    }


def about(obscure_paths: bool = True):
    """About box describing cimap, its run kernels and core dependencies.

    Parameters
    ----------
    obscure_paths: bool, optional
        Remove user directory from printed paths. Default is True.

    Examples
    --------
    >>> import cimap
    >>> cimap.about()  # doctest: +SKIP
    <BLANKLINE>
        cimap
    ================
    cimap Version:        0.1.0
    Installation Path:    ~/cimap/src/cimap
    Run Kernels:          numpy, numba
    Auto Kernel:          numba
    Max States:           65536
    Memo Budget:          64 MiB
    <BLANKLINE>
        Dependencies
    ================
    NumPy Version:        1.26.4
    ...
    """
    for section, rows in environment_info(obscure_paths).items():
        print(f"\n    {section}\n================")
        for label, value in rows:
            print(f"{label + ':':<22s}{value}")


if __name__ == "__main__":
    about()
