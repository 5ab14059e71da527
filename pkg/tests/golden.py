"""Published boiler results, transcribed as printed (primes dropped from ids)."""

from __future__ import annotations

P_ZONES = {
    "s0": ("l0", "x! = 20 ∧ y! = 100"),
    "s1": ("l1", "620 ≤ x! ≤ 920 ∧ 4600 ≤ 30x! − 20y! ≤ 13600 ∧ y! = 700"),
    "s2": ("l2", "820 ≤ y! ≤ 940 ∧ 6600 ≤ 30y! − 30x! ≤ 10200 ∧ x! = 600"),
    "s3": ("l3", "960 ≤ x! ≤ 1080 ∧ −4800 ≤ 20x! − 30y! ≤ −2400 ∧ y! = 800"),
    "s4": ("l0", "900 ≤ y! ≤ 960 ∧ 0 ≤ 20y! − 20x! ≤ 1200 ∧ x! = 900"),
    "s5": ("l1", "900 ≤ x! ≤ 1000 ∧ 13000 ≤ 30x! − 20y! ≤ 16000 ∧ y! = 700"),
    "s6": ("l2", "820 ≤ y! ≤ 850 ∧ 6600 ≤ 30y! − 30x! ≤ 7500 ∧ x! = 600"),
}
P_TRANSITIONS = {
    ("s0", "a0", "s1"),
    ("s1", "a1", "s2"),
    ("s2", "a2", "s3"),
    ("s3", "a3", "s4"),
    ("s4", "a0", "s5"),
    ("s5", "a1", "s6"),
}

# s'0 is printed with "x? = 20"; the same variable x! is meant
Q_ZONES = {
    "s0": ("l0", "x! = 20 ∧ y! = 100"),
    "s1": ("l1", "720 ≤ x! ≤ 820 ∧ 7600 ≤ 30x! − 20y! ≤ 10600 ∧ y! = 700"),
    "s2": ("l2", "850 ≤ y! ≤ 910 ∧ 7500 ≤ 30y! − 30x! ≤ 9300 ∧ x! = 600"),
    "s3": ("l3", "990 ≤ x! ≤ 1020 ∧ −4200 ≤ 20x! − 30y! ≤ −3600 ∧ y! = 800"),
    "s4": ("l0", "900 ≤ y! ≤ 920 ∧ 0 ≤ 20y! − 20x! ≤ 400 ∧ x! = 900"),
}
Q_TRANSITIONS = {("s0", "a0", "s1"), ("s1", "a1", "s2"), ("s2", "a2", "s3"), ("s3", "a3", "s4")}

S1_SCHEMA = (
    "[l : {l0, l1, l2, l3}; x! : real; y! : real; clock : real | l = l1; 620 <= x! <= 920;"
    " 4600 <= 30x! - 20y! <= 13600; y! = 700; 30 <= clock <= 45]"
)
S1Q_SCHEMA = (
    "[l : {l0, l1, l2, l3}; x! : real; y! : real; clock : real | l = l1; 720 <= x! <= 820;"
    " 7600 <= 30x! - 20y! <= 10600; y! = 700; 35 <= clock <= 40]"
)
