'''
Computation-in-memory automata processing.
'''

__version__ = '0.1.0'

from .bitvector import BitVector
from .automata import (Nfa, HomogeneousAutomaton, AcceptanceResult, SymbolError, AutomatonFormatError,
                       homogenize, trim, merge_equivalent, nfa_accepts_oracle, nfa_simulate,
                       load_nfa, dump_nfa)
from .regex import parse_regex, RegexSyntaxError
from .engine import (ApProgram, RunState, RunStatistics, CapacityError, ImageFormatError,
                     compile, decompile, symbol_vector, follow_vector, accept, initial_state, step,
                     run, run_streams, read_image, write_image, program_to_text, program_from_text)
from .crossbar import (Backend, DeviceParams, Column, ColumnCost, EnduranceWarning,
                       program_column, evaluate_column, discharge_time, sense_column,
                       column_cost, calibrate, program_cost)
from .scouting import (ScoutArray, SenseConfig, Gate, MarginWarning, column_current,
                       scouting_read, default_references, program_array, truth_table)
from .perfmodel import (ArchParams, Workload, EfficiencyReport, multicore_metrics, mvp_metrics,
                        evaluate, improvement, sweep, ap_run_cost, ap_footprint)
from .config import DEFAULT_PROFILE, load_profile, dump_profile, load_sweep
from .run_report import RunReport
from .cimap_utils import about
