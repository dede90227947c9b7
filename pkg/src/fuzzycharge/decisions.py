"""Outcomes shared by the crisp and fuzzy controllers."""
from enum import Enum


class Decision(str, Enum):
    CONTINUE = "CONTINUE"
    STOP = "STOP"


class TimerDecision(str, Enum):
    START = "START"
    STOP = "STOP"
