"""
Result container for automata-processor runs.
"""

import numpy as np
import pandas as pd

from typing import FrozenSet, List, Optional


class RunReport(dict):
    """
    Bunch object for the outcome of a run: a dictionary whose keys are also attributes.

    Cost fields are filled from :func:`~.perfmodel.ap_run_cost` when the run is costed
    on a hardware backend, and are `None` for functional runs.
    """

    accepted: bool
    """bool : Whether an accepting state is active after the last symbol."""
    accepted_ever: bool
    """bool : Whether an accepting state was active at any step."""
    steps: int
    """int : Symbols consumed."""
    num_states: int
    """int : Program width N."""
    backend: str
    """str : `rram`, `sram` or `functional`."""
    latency: Optional[float]
    """float, optional : Total evaluation latency in seconds."""
    energy: Optional[float]
    """float, optional : Total evaluation energy in joules."""
    trace: Optional[List[FrozenSet[int]]]
    """list of frozenset, optional : Active states before the first and after every symbol."""
    cimap_version: str
    """str : Version of cimap that produced the report."""

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.__dict__ = self

    def summary(self) -> str:
        """One human-readable line."""
        verdict = "accepted" if self.accepted else "rejected"
        text = f"{verdict} after {self.steps} steps on {self.num_states} states ({self.backend})"
        if self.get('latency') is not None:
            text += f", {self.latency:.4g} s, {self.energy:.4g} J"
        return text

    def to_frame(self) -> pd.DataFrame:
        """Single-row frame of the scalar fields."""
        keys = ['accepted', 'accepted_ever', 'steps', 'num_states', 'backend', 'latency',
                'energy']
        return pd.DataFrame([{k: self.get(k) for k in keys}])

    def trace_frame(self) -> pd.DataFrame:
        """
        Active states per step as a 0/1 frame with one column per state.

        Raises
        ------
        ValueError
            If the run was not traced.
        """
        if self.get('trace') is None:
            raise ValueError("Run was not traced")
        bits = np.zeros((len(self.trace), self.num_states), dtype=np.uint8)
        for t, active in enumerate(self.trace):
            bits[t, sorted(active)] = 1
        frame = pd.DataFrame(bits, columns=[f"s{n}" for n in range(self.num_states)])
        frame.index.name = 'step'
        return frame
