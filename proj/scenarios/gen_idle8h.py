#!/usr/bin/env python3
# Copyright 2026 The exosim Authors
#
#    Licensed under the Apache License, Version 2.0 (the "License");
#    you may not use this file except in compliance with the License.
#    You may obtain a copy of the License at
#
#        http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS,
#    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#    See the License for the specific language governing permissions and
#    limitations under the License.

"""Writes idle8h.esc: eight hours idling with two detection cycles a minute.

A detection cycle puts a cup in view for 0.35 s, long enough for four
detector frames at 10 FPS and short of the six needed to open the hand, so
the controller sees objects but the hand stays at rest (100 mA baseline).
"""

import sys

HOURS = 8
CYCLE_OFFSETS_S = (10, 40)
VISIBLE_S = 0.35


def main(path):
    lines = [
        "# Generated by gen_idle8h.py; do not edit.",
        "# 8 h at rest, two 0.35 s cup detections per minute.",
        "battery 12.8",
        "seed 7",
    ]
    for minute in range(HOURS * 60):
        for off in CYCLE_OFFSETS_S:
            t = minute * 60 + off
            lines.append(f"at {t} object cup score=0.9 prob=1")
            lines.append(f"at {t + VISIBLE_S:.2f} clear")
    lines.append(f"at {HOURS * 3600} end")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "idle8h.esc")
