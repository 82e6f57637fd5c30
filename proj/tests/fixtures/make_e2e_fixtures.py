#!/usr/bin/env python3
"""Builds the end-to-end fixture set: a problems file, a mock-server reply
script (10 problems x 3 efforts x 1 sample plus a k=8 batch on 4 problems),
and the usage rows for the estimate stage.

Reply lengths are chosen so the seed gates have real work: some triples pass
the 300-token pairwise gap, some fail it, and some have wrong answers mixed
in. Filler sentences keep token counts roughly proportional to word counts
under the fixture tokenizer.
"""

import json

FILLER = (
    "Let me think about this step by step and verify the intermediate results "
    "carefully before moving on. "
)


def body(answer, filler_repeats, wrong=False, marker="boxed"):
    text = FILLER * filler_repeats
    value = str(answer + 1) if wrong else str(answer)
    if marker == "boxed":
        text += "So the final answer is \\boxed{" + value + "}."
    else:
        text += "\n#### " + value
    return text


PROBLEMS = []
for i in range(10):
    PROBLEMS.append(
        {
            "id": f"prob{i:02d}",
            "statement": f"Compute the value of {i} + {i}.",
            "gold_answer": str(2 * i),
            "source": "e2e",
        }
    )

# (low_repeats, medium_repeats, high_repeats, low_ok, medium_ok, high_ok)
# 6 filler repeats ~= 100+ tokens, so a difference of >=20 repeats clears the
# 300-token pairwise gap comfortably and <=10 repeats fails it.
TRIPLE_PLAN = {
    0: (5, 30, 60, True, True, True),    # kept by both gates
    1: (8, 35, 70, True, True, True),    # kept
    2: (10, 16, 70, True, True, True),   # gap low-medium too small -> dropped
    3: (5, 30, 60, True, False, True),   # medium wrong -> dropped
    4: (60, 30, 5, True, True, True),    # reversed lengths, kept after reorder
    5: (5, 28, 55, True, True, True),    # kept
    6: (5, 30, 60, False, True, True),   # low wrong -> dropped
    7: (12, 15, 18, True, True, True),   # all gaps tiny -> dropped
    8: (6, 32, 64, True, True, True),    # kept
    9: (5, 30, 60, True, True, False),   # high wrong -> dropped
}

EFFORT_SEED = 0  # one sample per effort, base_seed 0

replies = []
for i, plan in TRIPLE_PLAN.items():
    answer = 2 * i
    low_rep, med_rep, high_rep, low_ok, med_ok, high_ok = plan
    user = PROBLEMS[i]["statement"]
    marker = "hash" if i % 3 == 0 else "boxed"
    replies.append(
        {
            "user": user,
            "effort": "low",
            "seed": EFFORT_SEED,
            "text": body(answer, low_rep, wrong=not low_ok, marker=marker),
        }
    )
    replies.append(
        {
            "user": user,
            "effort": "medium",
            "seed": EFFORT_SEED,
            "text": body(answer, med_rep, wrong=not med_ok),
        }
    )
    replies.append(
        {
            "user": user,
            "effort": "high",
            "seed": EFFORT_SEED,
            "text": body(answer, high_rep, wrong=not high_ok),
        }
    )

# k=8 effort-free batch on the first four problems; mixed correctness so the
# pairs stage emits both pair kinds and drops all-wrong problems.
# (repeats, correct) per sample index
BATCH_PLAN = {
    0: [(9, True), (7, True), (11, True), (3, False), (30, False), (5, True), (22, True), (16, False)],
    1: [(12, True), (20, False), (2, False), (18, True), (25, False), (14, True), (9, True), (4, False)],
    2: [(8, False), (15, False), (21, False), (11, False), (5, False), (18, False), (9, False), (13, False)],
    3: [(6, True), (10, True), (13, True), (17, True), (8, True), (12, True), (20, True), (15, True)],
}

for i, plan in BATCH_PLAN.items():
    answer = 2 * i
    user = PROBLEMS[i]["statement"]
    for sample_index, (repeats, ok) in enumerate(plan):
        replies.append(
            {
                "user": user,
                "effort": "",
                "seed": 1000 + sample_index,  # base_seed 1000 in the e2e config
                "text": body(answer, repeats, wrong=not ok),
            }
        )

USAGE_ROWS = [
    {"id": "u1", "summary_tokens_reference": 100, "reasoning_tokens_provider": 300,
     "completion_tokens_provider": 400},
    {"id": "u2", "summary_tokens_reference": 250, "reasoning_tokens_provider": 500,
     "completion_tokens_provider": 700},
    {"id": "u3", "summary_tokens_reference": 80, "reasoning_tokens_provider": 200,
     "completion_tokens_provider": 200},  # degenerate
    {"id": "u4", "summary_tokens_reference": 120, "reasoning_tokens_provider": 90,
     "completion_tokens_provider": 480},
]


def main():
    with open("e2e_problems.jsonl", "w") as f:
        for p in PROBLEMS:
            f.write(json.dumps(p) + "\n")
    with open("e2e_mock_script.json", "w") as f:
        json.dump({"replies": replies}, f, indent=1)
    with open("e2e_usage.jsonl", "w") as f:
        for row in USAGE_ROWS:
            f.write(json.dumps(row) + "\n")
    print(f"{len(PROBLEMS)} problems, {len(replies)} scripted replies")


if __name__ == "__main__":
    main()
