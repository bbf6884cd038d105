"""Anytime posterior bounds for multiply connected belief networks by bounded conditioning."""

from .bounded import BoundSnapshot, InstanceLedger, Session, begin_session, posterior_bounds, weight_bounds
from .conditioning import InstanceSolver, condition, exact_posterior, exact_update, init_instance_weights, prior_marginal
from .cutset import Cutset, CutsetInstance, enumerate_instances, find_loop_cutset, instance_count, split_network, verify_cutset
from .network import BeliefNetwork, ConditionalTable, Evidence, Observation, Variable, generate_random, is_singly_connected, parse_network, serialize_network, validate

__all__ = [
    "BeliefNetwork", "BoundSnapshot", "ConditionalTable", "Cutset", "CutsetInstance", "Evidence",
    "InstanceLedger", "InstanceSolver", "Observation", "Session", "Variable", "begin_session", "condition",
    "enumerate_instances", "exact_posterior", "exact_update", "find_loop_cutset", "generate_random",
    "init_instance_weights", "instance_count", "is_singly_connected", "parse_network", "posterior_bounds",
    "prior_marginal", "serialize_network", "split_network", "validate", "verify_cutset", "weight_bounds",
]
