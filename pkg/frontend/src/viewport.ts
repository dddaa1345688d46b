/** Uniform-scale mapping between world X/Z and canvas pixels.
 *
 * World +x maps right, world +z maps up; canvas y grows downward, so the
 * z axis is flipped. The scale is the same on both axes (no distortion),
 * chosen to fit the bounds inside the canvas minus a margin.
 */

export interface WorldBounds {
  minX: number;
  minZ: number;
  maxX: number;
  maxZ: number;
}

export class Viewport {
  readonly scale: number;
  private readonly px0: number;
  private readonly py0: number;

  constructor(
    readonly bounds: WorldBounds,
    readonly width: number,
    readonly height: number,
    margin = 24,
  ) {
    const spanX = Math.max(bounds.maxX - bounds.minX, 1e-6);
    const spanZ = Math.max(bounds.maxZ - bounds.minZ, 1e-6);
    const usableW = Math.max(width - 2 * margin, 1);
    const usableH = Math.max(height - 2 * margin, 1);
    this.scale = Math.min(usableW / spanX, usableH / spanZ);
    // Center the fitted bounds inside the canvas.
    this.px0 = (width - spanX * this.scale) / 2 - bounds.minX * this.scale;
    this.py0 = (height - spanZ * this.scale) / 2 + bounds.maxZ * this.scale;
  }

  toPixel(x: number, z: number): [number, number] {
    return [this.px0 + x * this.scale, this.py0 - z * this.scale];
  }

  toWorld(px: number, py: number): [number, number] {
    return [(px - this.px0) / this.scale, (this.py0 - py) / this.scale];
  }

  /** World meters covered by one pixel. */
  get worldPerPixel(): number {
    return 1 / this.scale;
  }
}

/** Grow bounds to include a point. */
export function extendBounds(b: WorldBounds, x: number, z: number): WorldBounds {
  return {
    minX: Math.min(b.minX, x),
    minZ: Math.min(b.minZ, z),
    maxX: Math.max(b.maxX, x),
    maxZ: Math.max(b.maxZ, z),
  };
}

export function paddedBounds(b: WorldBounds, pad: number): WorldBounds {
  return { minX: b.minX - pad, minZ: b.minZ - pad, maxX: b.maxX + pad, maxZ: b.maxZ + pad };
}
