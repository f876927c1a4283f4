"""Writes synthetic_vix_2007_2009.csv: a made-up daily close series.

Log level follows a discrete mean-reverting walk with a regime shift in
autumn 2008. Weekends are skipped; holidays are not. Deterministic.
"""
import csv
import datetime as dt
import math
import random

rng = random.Random(20080101)
day = dt.date(2007, 1, 2)
end = dt.date(2009, 12, 31)
x = math.log(15.0)
rows = []
while day <= end:
    if day.weekday() < 5:
        target = math.log(45.0) if dt.date(2008, 9, 15) <= day <= dt.date(2009, 3, 31) else math.log(20.0)
        x += 0.05 * (target - x) + 0.06 * rng.gauss(0.0, 1.0)
        rows.append((day.isoformat(), f"{math.exp(x):.2f}"))
    day += dt.timedelta(days=1)

with open("synthetic_vix_2007_2009.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["date", "close"])
    w.writerows(rows)
