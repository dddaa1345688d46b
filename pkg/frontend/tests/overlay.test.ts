import { describe, expect, it } from "vitest";

import { cellRect, overlayRect } from "../src/renderer";
import { Viewport } from "../src/viewport";
import type { HeatmapGridInfo } from "../src/types";

// Grid the server derives for a session whose samples all sit at (2, 3):
// the bounding box is padded by one cell, so the hot cell is interior.
const SINGLE_POINT_GRID: HeatmapGridInfo = {
  originX: 1.75,
  originZ: 2.75,
  cellSize: 0.25,
  cols: 3,
  rows: 3,
};

describe("heatmap overlay alignment", () => {
  it("places the single hot cell under the marker within one pixel", () => {
    const vp = new Viewport({ minX: -1, minZ: -1, maxX: 5, maxZ: 6 }, 800, 600);
    const [markerX, markerY] = vp.toPixel(2, 3);

    // (2, 3) falls in column 1, row 1 by floor division from the origin.
    const hot = cellRect(vp, SINGLE_POINT_GRID, 1, 1);
    expect(markerX).toBeGreaterThanOrEqual(hot.left - 1);
    expect(markerX).toBeLessThanOrEqual(hot.left + hot.width + 1);
    expect(markerY).toBeGreaterThanOrEqual(hot.top - 1);
    expect(markerY).toBeLessThanOrEqual(hot.top + hot.height + 1);

    // The sample sits exactly on the cell's min corner, which maps to the
    // rect's bottom-left in canvas space (z points up on screen).
    expect(markerX).toBeCloseTo(hot.left, 9);
    expect(markerY).toBeCloseTo(hot.top + hot.height, 9);
  });

  it("tiles the overlay rect exactly with the cell rects", () => {
    const vp = new Viewport({ minX: 0, minZ: 0, maxX: 10, maxZ: 10 }, 640, 640);
    const grid: HeatmapGridInfo = { originX: 1, originZ: 2, cellSize: 0.5, cols: 4, rows: 6 };
    const whole = overlayRect(vp, grid);

    const bottomLeft = cellRect(vp, grid, 0, 0);
    const topRight = cellRect(vp, grid, grid.cols - 1, grid.rows - 1);
    expect(bottomLeft.left).toBeCloseTo(whole.left, 9);
    expect(bottomLeft.top + bottomLeft.height).toBeCloseTo(whole.top + whole.height, 9);
    expect(topRight.top).toBeCloseTo(whole.top, 9);
    expect(topRight.left + topRight.width).toBeCloseTo(whole.left + whole.width, 9);

    expect(whole.width).toBeCloseTo(grid.cols * grid.cellSize * vp.scale, 9);
    expect(whole.height).toBeCloseTo(grid.rows * grid.cellSize * vp.scale, 9);
  });

  it("maps grid row 0 to the bottom edge of the overlay", () => {
    const vp = new Viewport({ minX: -5, minZ: -5, maxX: 5, maxZ: 5 }, 500, 500);
    const grid: HeatmapGridInfo = { originX: -2, originZ: -2, cellSize: 1, cols: 4, rows: 4 };
    const row0 = cellRect(vp, grid, 0, 0);
    const row3 = cellRect(vp, grid, 0, 3);
    // Canvas y grows downward, so the min-z row has the larger top.
    expect(row0.top).toBeGreaterThan(row3.top);
  });
});
