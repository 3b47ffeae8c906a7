"""Crowdfunding campaign simulator with status-report disclosure policies."""

from crowdinfo.backers import BackerProfile, EstimatorParams
from crowdinfo.campaign import CampaignParams, Ledger, StatusReport, record_pledges, status_at
from crowdinfo.engine import PolicyParams, SimConfig, SimResult, run_campaign, settle
from crowdinfo.order import Dominance, dominates, shrink

__all__ = [
    "BackerProfile",
    "CampaignParams",
    "Dominance",
    "EstimatorParams",
    "Ledger",
    "PolicyParams",
    "SimConfig",
    "SimResult",
    "StatusReport",
    "dominates",
    "record_pledges",
    "run_campaign",
    "settle",
    "shrink",
    "status_at",
]
