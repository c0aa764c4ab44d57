"""Walk the physical layer: geometry, antenna gain, and jamming-to-signal ratio.

The reference network has three frequency-agile radars and twelve jamming
UAVs strung along a line; the covered target starts 80+ km out and closes in.
"""

import numpy as np

from farjam import default_scenario, distance_target_radar, radar_gain_toward_uav, uav_radar_angle

scenario = default_scenario()
target = scenario.initial_state

print("radars:")
for radar in scenario.radars:
    print(f"  radar {radar.idx + 1} at {radar.position}, "
          f"target range {distance_target_radar(target, radar) / 1e3:.1f} km")

print("\nper-UAV angle off each radar's boresight (rad), * marks the mainlobe:")
half = scenario.radars[0].mainlobe_width / 2
for uav in scenario.uavs:
    marks = []
    for radar in scenario.radars:
        theta = uav_radar_angle(uav, radar, target)
        marks.append(f"{theta:5.2f}{'*' if theta <= half else ' '}")
    print(f"  UAV {uav.idx + 1:2d}: " + "  ".join(marks))

print("\nJSR table at frame 1 (rows = UAVs, cols = radars):")
table = scenario.jsr_table(target)
for n, row in enumerate(table):
    print(f"  UAV {n + 1:2d}: " + "  ".join(f"{v:8.1f}" for v in row))

print("\nstrongest single jammer per radar (mainlobe geometry):",
      np.argmax(table, axis=0) + 1)

print("\nbacklobe gain for reference:",
      f"{radar_gain_toward_uav(scenario.radars[0], np.pi):.1f}",
      f"(mainlobe {scenario.radars[0].mainlobe_gain:.0f})")
