#!/usr/bin/env python3
"""Generate the bundled synthetic sample under data/sample/.

Three task families, six occupations spread over all wage terciles, postings
for every month of 2010-2017, plus a handful of deliberately bad records.
Alongside the inputs it writes expected.json: counts and pair statistics
computed here, independently of the C++ ingest code, for the tests to check.

    python3 tools/make_sample.py [--seed 20100101] [--out data/sample]
"""

import argparse
import calendar
import json
import random
from collections import defaultdict
from pathlib import Path

TASKS = [
    # task, cluster, family
    ("Python", "Scripting Languages", "Information Technology"),
    ("Perl", "Scripting Languages", "Information Technology"),
    ("SQL", "SQL Databases and Programming", "Information Technology"),
    ("Machine Learning", "Artificial Intelligence", "Information Technology"),
    ("Patient Care", "Basic Patient Care", "Health Care"),
    ("Vital Signs", "Basic Patient Care", "Health Care"),
    ("Medical Coding", "Medical Billing and Coding", "Health Care"),
    ("Scheduling", "Scheduling", "Administration"),
    ("Data Entry", "Clerical Duties", "Administration"),
    ("Filing", "Clerical Duties", "Administration"),
]

# soc, family name, 2010 wage, 2010 employment, yearly wage growth, yearly employment growth
OCCUPATIONS = [
    ("15-1132", "Computer and Mathematical", 43.27, 520000, 0.030, 0.050),
    ("11-9111", "Management", 44.00, 283000, 0.025, 0.030),
    ("29-1141", "Healthcare Practitioners and Technical", 31.99, 2655000, 0.020, 0.015),
    ("43-4051", "Office and Administrative Support", 15.50, 2187000, 0.015, 0.005),
    ("43-6013", "Office and Administrative Support", 14.68, 525000, 0.015, 0.010),
    ("31-1014", "Healthcare Support", 11.50, 1450000, 0.012, 0.012),
]

# Which tasks each occupation's postings may mention, with a base probability
# and a per-year drift of that probability.
DESIGN = {
    "15-1132": {"Python": (0.30, 0.030), "Perl": (0.20, -0.015), "SQL": (0.50, -0.010),
                "Machine Learning": (0.05, 0.030), "Scheduling": (0.05, 0.0)},
    "11-9111": {"SQL": (0.10, 0.005), "Scheduling": (0.40, 0.0), "Medical Coding": (0.15, 0.005),
                "Patient Care": (0.30, -0.005), "Data Entry": (0.10, -0.005)},
    "29-1141": {"Patient Care": (0.70, 0.0), "Vital Signs": (0.40, 0.010), "Medical Coding": (0.10, 0.005),
                "Scheduling": (0.15, 0.0)},
    "43-4051": {"Data Entry": (0.50, -0.010), "Filing": (0.30, -0.015), "SQL": (0.05, 0.005),
                "Scheduling": (0.30, 0.005)},
    "43-6013": {"Medical Coding": (0.40, 0.010), "Scheduling": (0.60, 0.0), "Data Entry": (0.40, -0.005),
                "Filing": (0.30, -0.010)},
    "31-1014": {"Patient Care": (0.80, 0.0), "Vital Signs": (0.50, 0.005), "Filing": (0.10, -0.005)},
}

UNKNOWN_TASK = "Underwater Basket Weaving"
FIRST_YEAR, LAST_YEAR = 2010, 2017


def canonical(name):
    return " ".join(name.split()).lower()


def noisy_name(rng, name):
    r = rng.random()
    if r < 0.05:
        return name.upper()
    if r < 0.10:
        return "  " + name.replace(" ", "   ") + " "
    return name


def date_in(rng, year, month):
    return f"{year:04d}-{month:02d}-{rng.randint(1, calendar.monthrange(year, month)[1]):02d}"


def generate(seed):
    rng = random.Random(seed)
    lines = []
    serial = 0

    def emit(date, soc, tasks):
        nonlocal serial
        serial += 1
        lines.append(json.dumps({"posting_id": f"P{serial:06d}", "date": date, "soc": soc, "tasks": tasks}))

    for year in range(FIRST_YEAR, LAST_YEAR + 1):
        for month in range(1, 13):
            elapsed = (year - FIRST_YEAR) + (month - 1) / 12.0
            for soc, *_ in OCCUPATIONS:
                design = DESIGN[soc]
                for k in range(rng.randint(12, 20)):
                    if year == FIRST_YEAR and month == 1 and k == 0:
                        chosen = list(design)  # every designed pair appears at least once
                    else:
                        chosen = [t for t, (p0, drift) in design.items()
                                  if rng.random() < min(0.95, max(0.01, p0 + drift * elapsed))]
                    tasks = [noisy_name(rng, t) for t in chosen]
                    if tasks and rng.random() < 0.05:
                        tasks.append(noisy_name(rng, rng.choice(chosen)))  # repeated mention
                    if rng.random() < 0.03:
                        tasks.append(UNKNOWN_TASK)
                    rng.shuffle(tasks)
                    emit(date_in(rng, year, month), soc, tasks)

    # records that must be skipped and reported
    emit("2009-12-15", "15-1132", ["Python"])
    emit("2009-11-30", "29-1141", ["Patient Care"])
    emit("2018-01-02", "43-4051", ["Filing"])
    emit("2013-02-30", "15-1132", ["SQL"])
    emit("not-a-date", "31-1014", ["Filing"])
    emit("2014-06-10", "53-3032", ["Scheduling"])  # valid SOC, not in the taxonomy
    emit("2014-06-11", "1-234", ["Scheduling"])
    lines.append('{"posting_id": "BROKEN", "date": "2012-01-01", "soc": ')
    lines.append('{"posting_id": "NOTASKS", "date": "2012-01-01", "soc": "15-1132"}')
    return lines


def expected_counts(lines, known_socs):
    known_tasks = {canonical(t) for t, _, _ in TASKS}
    family_of = {canonical(t): f for t, _, f in TASKS}
    out = defaultdict(int)
    n = defaultdict(int)
    m = defaultdict(int)
    for line in lines:
        out["records_read"] += 1
        try:
            rec = json.loads(line)
            date, soc, tasks = rec["date"], rec["soc"], rec["tasks"]
        except (json.JSONDecodeError, KeyError):
            out["malformed_records"] += 1
            continue
        try:
            y, mo, d = (int(x) for x in date.split("-"))
            if d > calendar.monthrange(y, mo)[1]:
                raise ValueError
        except ValueError:
            out["bad_date"] += 1
            continue
        if not (FIRST_YEAR <= y <= LAST_YEAR):
            out["out_of_window"] += 1
            continue
        if soc not in known_socs:
            out["unknown_soc"] += 1
            continue
        ids = []
        for t in tasks:
            if canonical(t) in known_tasks:
                ids.append(canonical(t))
            else:
                out["unknown_task_mentions"] += 1
        distinct = set(ids)
        out["duplicate_task_mentions"] += len(ids) - len(distinct)
        if not distinct:
            out["task_free_postings"] += 1
        month = (y - FIRST_YEAR) * 12 + mo - 1
        m[(soc, month)] += 1
        for t in distinct:
            n[(t, soc, month)] += 1
        out["postings_counted"] += 1

    occs_per_task = defaultdict(set)
    tasks_per_occ = defaultdict(set)
    for (t, soc, _month) in n:
        occs_per_task[t].add(soc)
        tasks_per_occ[soc].add(t)
    tasks_per_family = defaultdict(set)
    for t in occs_per_task:
        tasks_per_family[family_of[t]].add(t)

    out["mention_rows"] = len(n)
    out["posting_rows"] = len(m)
    out["total_mentions"] = sum(n.values())
    out["occs_per_task"] = {t: len(s) for t, s in sorted(occs_per_task.items())}
    out["tasks_per_occ"] = {s: len(t) for s, t in sorted(tasks_per_occ.items())}
    out["tasks_per_family"] = {f: len(t) for f, t in sorted(tasks_per_family.items())}
    return dict(out)


def annual_rows():
    rows = []
    for soc, _fam, wage, emp, wg, eg in OCCUPATIONS:
        for year in range(FIRST_YEAR, LAST_YEAR + 2):
            k = year - FIRST_YEAR
            rows.append((soc, year, round(wage * (1 + wg) ** k, 2), round(emp * (1 + eg) ** k)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=20100101)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "sample")
    args = ap.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "tasks.csv", "w") as f:
        f.write("task,cluster,family\n")
        for t, c, fam in TASKS:
            f.write(f"{t},{c},{fam}\n")
    with open(out / "soc_families.csv", "w") as f:
        f.write("soc,family_name\n")
        for soc, fam, *_ in OCCUPATIONS:
            f.write(f'{soc},"{fam}"\n')
    with open(out / "annual_stats.csv", "w") as f:
        f.write("soc,year,hourly_wage,employment\n")
        for soc, year, wage, emp in annual_rows():
            f.write(f"{soc},{year},{wage:.2f},{emp}\n")

    lines = generate(args.seed)
    with open(out / "postings.jsonl", "w") as f:
        f.write("\n".join(lines) + "\n")
    expected = expected_counts(lines, {soc for soc, *_ in OCCUPATIONS})
    expected["seed"] = args.seed
    with open(out / "expected.json", "w") as f:
        json.dump(expected, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(out / "taskshare.conf", "w") as f:
        f.write("# Sample configuration; paths are relative to this file.\n"
                "taxonomy = tasks.csv\n"
                "soc_families = soc_families.csv\n"
                "postings = postings.jsonl\n"
                "annual_stats = annual_stats.csv\n"
                "window_start = 2010-01\n"
                "window_end = 2017-12\n"
                "smoothing_window = 3\n"
                "train_months = 72\n"
                "trend_time_scale = unit\n")


if __name__ == "__main__":
    main()
