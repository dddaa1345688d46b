/** Just enough quaternion math to orient markers on the 2D canvas. */

import type { Quat, Vec3 } from "./types";

/** Rotate a vector by a unit quaternion (q v q*). */
export function rotateVector(q: Quat, v: Vec3): Vec3 {
  const [x, y, z, w] = q;
  // t = 2 q_vec x v
  const tx = 2 * (y * v[2] - z * v[1]);
  const ty = 2 * (z * v[0] - x * v[2]);
  const tz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * tx + (y * tz - z * ty),
    v[1] + w * ty + (z * tx - x * tz),
    v[2] + w * tz + (x * ty - y * tx),
  ];
}

/** Facing direction: the rotated +z axis. */
export function forward(q: Quat): Vec3 {
  return rotateVector(q, [0, 0, 1]);
}

/** Heading on the ground plane, radians, 0 = +z, increasing toward +x. */
export function yawOf(q: Quat): number {
  const f = forward(q);
  return Math.atan2(f[0], f[2]);
}

/** Pitch above the horizon in radians (positive = looking up). */
export function pitchOf(q: Quat): number {
  const f = forward(q);
  return Math.atan2(f[1], Math.hypot(f[0], f[2]));
}
