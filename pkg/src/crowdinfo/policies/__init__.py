from crowdinfo.policies.beliefs import BeliefTable
from crowdinfo.policies.disclosure import (
    DisclosureDecision,
    DSHSPolicy,
    Frontier,
    ImmediatePolicy,
    candidate_set,
    dshs_step,
    immediate_policy,
)
from crowdinfo.policies.meta import MetaSelector, MetaState, majority_vote, revenue_prospect
from crowdinfo.policies.selectors import (
    CandidateView,
    EpsGreedySelector,
    GreedySelector,
    RandomSelector,
    SoftmaxSelector,
    make_selector,
    selector_distribution,
)

POLICY_NAMES = ("immediate", "random", "greedy", "eps_greedy", "softmax", "meta")


def make_policy(name: str, learning_rate: float = 0.1, c: float = 0.2, mu: float = 1e-4, sigma: float = 0.9):
    """Build a fresh policy by group name; call ``reset`` before each run."""
    if name == "immediate":
        return ImmediatePolicy()
    if name == "meta":
        from crowdinfo.policies.meta import default_experts

        return DSHSPolicy(MetaSelector(default_experts(c, mu), sigma), learning_rate)
    params = {"eps_greedy": {"c": c}, "softmax": {"mu": mu}}.get(name, {})
    return DSHSPolicy(make_selector(name, **params), learning_rate)
