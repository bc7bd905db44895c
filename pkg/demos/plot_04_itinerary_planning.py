"""
Planning a multiday trip
========================

Enumerate every feasible single-day route over a small catalog, then
pack days so that no place is visited twice.
"""

from trajmine import Coordinate, PlanParams, Poi, PoiCatalog, enumerate_single_day, plan_multiday

hotel = Coordinate(2.1950, 102.2490)
catalog = PoiCatalog([
    Poi("fort", Coordinate(2.1917, 102.2503), 3600, 9.0),
    Poi("museum", Coordinate(2.1940, 102.2490), 5400, 7.0),
    Poi("zoo", Coordinate(2.2774, 102.2990), 10800, 8.0),
    Poi("planetarium", Coordinate(2.2720, 102.2870), 3600, 4.0),
    Poi("beach", Coordinate(2.1480, 102.3260), 7200, 6.0),
    Poi("market", Coordinate(2.2010, 102.2460), 3600, 3.0, preferred=True),
])

p = PlanParams(days=2, day_budget_s=8 * 3600, travel_speed_kmh=20)
days = enumerate_single_day(catalog, hotel, p)
print(len(days), "feasible single-day itineraries")
best = max(days, key=lambda d: d.total_score)
print("best single day:", best.pois, f"{best.total_time_s / 3600:.2f} h")

plan = plan_multiday(catalog, hotel, p)
for n, day in enumerate(plan.days, start=1):
    print(f"day {n}: {' -> '.join(day.pois)}  ({day.total_time_s / 3600:.2f} h)")
print("score", plan.score, "forced", plan.forced)

# returning to the hotel each evening costs time, so fewer places fit
back = plan_multiday(catalog, hotel, PlanParams(days=2, return_to_start=True))
print("with return to start:", [d.pois for d in back.days])
