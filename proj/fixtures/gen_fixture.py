#!/usr/bin/env python3
"""Regenerates fixture.csv: 200 synthetic admission-style rows, 12 columns.

Self-contained LCG so the output is byte-stable across Python versions.
Completion probability depends jointly on GENDER and AGE (a planted
interaction the chi-squared reweighting tests look for). A few EDUC and
GENDER cells are left empty to exercise imputation.
"""

import os

SEED = 20260810
N_ROWS = 200

COLUMNS = [
    "REASON", "NOPRIOR", "SERVICES", "GENDER", "RACE", "AGE",
    "ETHNIC", "VET", "EDUC", "MARSTAT", "EMPLOY", "PREG",
]


class Lcg:
    def __init__(self, seed):
        self.state = seed & 0xFFFFFFFFFFFFFFFF

    def real(self):
        self.state = (self.state * 6364136223846793005 + 1442695040888963407) \
            & 0xFFFFFFFFFFFFFFFF
        return (self.state >> 11) / float(1 << 53)

    def choice(self, pairs):
        """pairs: list of (value, weight); weights sum to 1."""
        u = self.real()
        acc = 0.0
        for value, weight in pairs:
            acc += weight
            if u < acc:
                return value
        return pairs[-1][0]


def main():
    rng = Lcg(SEED)
    rows = []
    for i in range(N_ROWS):
        gender = rng.choice([("1", 0.55), ("2", 0.45)])
        age = rng.choice([("4", 0.25), ("7", 0.30), ("9", 0.25), ("11", 0.20)])
        race = rng.choice([("5", 0.60), ("2", 0.25), ("4", 0.15)])
        ethnic = rng.choice([("4", 0.80), ("2", 0.20)])
        vet = rng.choice([("2", 0.85), ("1", 0.15)])
        educ = rng.choice([("1", 0.10), ("2", 0.25), ("3", 0.30), ("4", 0.25), ("5", 0.10)])
        marstat = rng.choice([("1", 0.45), ("2", 0.30), ("3", 0.15), ("4", 0.10)])
        employ = rng.choice([("1", 0.30), ("2", 0.20), ("3", 0.30), ("4", 0.20)])
        preg = rng.choice([("2", 0.90), ("1", 0.10)])
        services = rng.choice([("4", 0.60), ("5", 0.25), ("7", 0.15)])
        noprior = rng.choice([("0", 0.50), ("1", 0.30), ("2", 0.13),
                              ("3", 0.04), ("4", 0.02), ("5", 0.01)])

        under40 = age in ("4", "7")
        male = gender == "1"
        if male and under40:
            p_complete = 0.70
        elif male:
            p_complete = 0.25
        elif under40:
            p_complete = 0.20
        else:
            p_complete = 0.60
        if rng.real() < p_complete:
            reason = "1"
        else:
            reason = rng.choice([("2", 0.40), ("3", 0.35), ("5", 0.25)])

        if i % 31 == 5:
            educ = ""
        if i % 53 == 11:
            gender = ""

        rows.append([reason, noprior, services, gender, race, age,
                     ethnic, vet, educ, marstat, employ, preg])

    out_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixture.csv")
    with open(out_path, "w", newline="") as f:
        f.write(",".join(COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")
    print(f"wrote {out_path}: {len(rows)} rows, {len(COLUMNS)} columns")


if __name__ == "__main__":
    main()
