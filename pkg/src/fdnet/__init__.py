"""Simulating message-passing protocols over fully-defective networks."""

from ._kernels import BACKEND
from .builder import BuildResult, build_robbins, check_build
from .codec import WireCodec, deframe, frame, pad, unary_decode, unary_encode, unpad
from .cycle_sim import BINARY, UNARY, make_cycle_automaton
from .engine import AdversaryPolicy, PulseEvent, RunResult, SchedulerPolicy, run
from .graph import (
    BridgeError, CycleRep, Graph, GraphError, find_bridges, shortest_directed_path, validate_cycle,
)
from .protocol import BROADCAST, Envelope, Transcript, builtin_protocol, project
from .robbins_sim import make_robbins_automaton, rotate_edges
from .runner import run_direct, simulate
from .verifier import (
    bridge_demo, check_lemma_properties, derive_tau, extract_epochs, pulse_metrics, verify_tau,
)

__all__ = [
    "BACKEND", "BuildResult", "build_robbins", "check_build", "WireCodec", "deframe", "frame", "pad",
    "unary_decode", "unary_encode", "unpad", "BINARY", "UNARY", "make_cycle_automaton", "AdversaryPolicy",
    "PulseEvent", "RunResult", "SchedulerPolicy", "run", "BridgeError", "CycleRep", "Graph", "GraphError",
    "find_bridges", "shortest_directed_path", "validate_cycle", "BROADCAST", "Envelope", "Transcript",
    "builtin_protocol", "project", "make_robbins_automaton", "rotate_edges", "run_direct", "simulate",
    "bridge_demo", "check_lemma_properties", "derive_tau", "extract_epochs", "pulse_metrics", "verify_tau",
]
