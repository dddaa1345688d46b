/** Canvas drawing for the top-down scene.
 *
 * Draws exactly what the latest frame contains: the server already applied
 * visibility filters, so nothing is re-filtered here. The context is typed
 * as a slim interface so tests can record calls without a real canvas.
 */

import { yawOf } from "./geometry";
import type { Annotation, EventMarker, Frame, HeatmapGridInfo, Rgb } from "./types";
import type { Viewport } from "./viewport";

/** The subset of CanvasRenderingContext2D the renderer needs. */
export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  save(): void;
  restore(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  translate(x: number, y: number): void;
  scale(x: number, y: number): void;
  drawImage(img: CanvasImageSource, dx: number, dy: number, dw: number, dh: number): void;
}

export interface OverlayState {
  image: CanvasImageSource;
  grid: HeatmapGridInfo;
}

export function cssColor(c: Rgb, alpha = 1): string {
  return `rgba(${c[0]},${c[1]},${c[2]},${alpha})`;
}

/** Canvas-space rectangle covering the heatmap grid. The raster's first
 * row is the min-z grid row, so the image is drawn flipped vertically. */
export function overlayRect(
  vp: Viewport,
  grid: HeatmapGridInfo,
): { left: number; top: number; width: number; height: number } {
  const [left, bottom] = vp.toPixel(grid.originX, grid.originZ);
  const width = grid.cols * grid.cellSize * vp.scale;
  const height = grid.rows * grid.cellSize * vp.scale;
  return { left, top: bottom - height, width, height };
}

/** Canvas-space rectangle of one grid cell. */
export function cellRect(
  vp: Viewport,
  grid: HeatmapGridInfo,
  col: number,
  row: number,
): { left: number; top: number; width: number; height: number } {
  const x = grid.originX + col * grid.cellSize;
  const z = grid.originZ + (row + 1) * grid.cellSize;
  const [left, top] = vp.toPixel(x, z);
  const side = grid.cellSize * vp.scale;
  return { left, top, width: side, height: side };
}

const MARKER_RADIUS = 6;
const EVENT_HALF = 4;
const NOTE_SIZE = 9;

export class Renderer {
  constructor(
    private readonly ctx: Ctx2D,
    readonly width: number,
    readonly height: number,
  ) {}

  draw(frame: Frame, vp: Viewport, overlay: OverlayState | null, notes: Annotation[]): void {
    const ctx = this.ctx;
    ctx.save();
    ctx.clearRect(0, 0, this.width, this.height);
    ctx.fillStyle = "#141518";
    ctx.fillRect(0, 0, this.width, this.height);

    if (overlay) this.drawOverlay(overlay, vp);
    this.drawStatics(frame, vp);
    this.drawTrails(frame, vp);
    this.drawEvents(frame, vp);
    this.drawObjects(frame, vp);
    this.drawNotes(notes, vp);
    ctx.restore();
  }

  private drawOverlay(overlay: OverlayState, vp: Viewport): void {
    const ctx = this.ctx;
    const r = overlayRect(vp, overlay.grid);
    ctx.save();
    ctx.globalAlpha = 0.6;
    // Flip vertically: raster row 0 is min z, canvas y grows downward.
    ctx.translate(r.left, r.top + r.height);
    ctx.scale(1, -1);
    ctx.drawImage(overlay.image, 0, 0, r.width, r.height);
    ctx.restore();
  }

  private drawStatics(frame: Frame, vp: Viewport): void {
    const ctx = this.ctx;
    ctx.save();
    ctx.lineWidth = 1;
    for (const s of frame.statics) {
      ctx.strokeStyle = cssColor(s.color, 0.7);
      const [px, py] = vp.toPixel(s.p[0], s.p[2]);
      if (s.extent) {
        const w = s.extent[0] * vp.scale;
        const h = s.extent[2] * vp.scale;
        ctx.strokeRect(px - w / 2, py - h / 2, w, h);
      } else {
        ctx.beginPath();
        ctx.moveTo(px - 4, py);
        ctx.lineTo(px + 4, py);
        ctx.moveTo(px, py - 4);
        ctx.lineTo(px, py + 4);
        ctx.stroke();
      }
    }
    ctx.restore();
  }

  private drawTrails(frame: Frame, vp: Viewport): void {
    const ctx = this.ctx;
    ctx.save();
    ctx.lineWidth = 1.5;
    for (const trail of frame.trails) {
      if (trail.points.length < 2) continue;
      ctx.strokeStyle = cssColor(trail.color, 0.5);
      ctx.beginPath();
      const [x0, y0] = vp.toPixel(trail.points[0][1], trail.points[0][3]);
      ctx.moveTo(x0, y0);
      for (let i = 1; i < trail.points.length; i++) {
        const [px, py] = vp.toPixel(trail.points[i][1], trail.points[i][3]);
        ctx.lineTo(px, py);
      }
      ctx.stroke();
    }
    ctx.restore();
  }

  private drawEvents(frame: Frame, vp: Viewport): void {
    const ctx = this.ctx;
    ctx.save();
    for (const ev of frame.events) {
      const [px, py] = vp.toPixel(ev.p[0], ev.p[2]);
      if (ev.kind === "input") {
        ctx.fillStyle = "#e8c34a";
        ctx.fillRect(px - EVENT_HALF, py - EVENT_HALF, EVENT_HALF * 2, EVENT_HALF * 2);
      } else {
        ctx.strokeStyle = "#e8c34a";
        ctx.lineWidth = 1.5;
        ctx.strokeRect(px - EVENT_HALF, py - EVENT_HALF, EVENT_HALF * 2, EVENT_HALF * 2);
      }
    }
    ctx.restore();
  }

  private drawObjects(frame: Frame, vp: Viewport): void {
    const ctx = this.ctx;
    ctx.save();
    for (const o of frame.objects) {
      const [px, py] = vp.toPixel(o.p[0], o.p[2]);
      if (o.camera) this.drawWedge(o, vp);
      const radius = o.category === "Hand" ? MARKER_RADIUS - 2 : MARKER_RADIUS;
      ctx.fillStyle = cssColor(o.color);
      ctx.beginPath();
      ctx.arc(px, py, radius, 0, Math.PI * 2);
      ctx.fill();
      if (o.category === "Player") {
        // Short heading tick so facing is visible at a glance.
        const yaw = yawOf(o.q);
        ctx.strokeStyle = cssColor(o.color);
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(px, py);
        ctx.lineTo(px + Math.sin(yaw) * radius * 2, py - Math.cos(yaw) * radius * 2);
        ctx.stroke();
      }
    }
    ctx.restore();
  }

  private drawWedge(o: Frame["objects"][number], vp: Viewport): void {
    if (!o.camera) return;
    const ctx = this.ctx;
    const [px, py] = vp.toPixel(o.p[0], o.p[2]);
    const yaw = yawOf(o.q);
    const half = Math.atan(o.camera.aspect * Math.tan(o.camera.vfov / 2));
    const reach = Math.min(o.camera.far, 3) * vp.scale;
    // Canvas angles: 0 = +x (east); world yaw 0 = +z (north, up on screen).
    const a0 = -Math.PI / 2 + yaw - half;
    const a1 = -Math.PI / 2 + yaw + half;
    ctx.save();
    ctx.fillStyle = cssColor(o.color, 0.18);
    ctx.strokeStyle = cssColor(o.color, 0.6);
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.arc(px, py, reach, a0, a1);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
    ctx.restore();
  }

  private drawNotes(notes: Annotation[], vp: Viewport): void {
    const ctx = this.ctx;
    ctx.save();
    for (const note of notes) {
      const [px, py] = vp.toPixel(note.p[0], note.p[2]);
      ctx.fillStyle = "#f5f1e8";
      ctx.strokeStyle = "#30302c";
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(px - NOTE_SIZE / 2, py - NOTE_SIZE);
      ctx.lineTo(px + NOTE_SIZE / 2, py - NOTE_SIZE);
      ctx.closePath();
      ctx.fill();
      ctx.stroke();
    }
    ctx.restore();
  }
}

/** Nearest event marker within reach of a canvas point, if any. */
export function hitEvent(
  frame: Frame,
  vp: Viewport,
  px: number,
  py: number,
  reach = EVENT_HALF + 3,
): EventMarker | null {
  let best: EventMarker | null = null;
  let bestDist = reach;
  for (const ev of frame.events) {
    const [ex, ey] = vp.toPixel(ev.p[0], ev.p[2]);
    const d = Math.hypot(ex - px, ey - py);
    if (d <= bestDist) {
      best = ev;
      bestDist = d;
    }
  }
  return best;
}

/** Nearest annotation icon within reach of a canvas point, if any. */
export function hitAnnotation(
  notes: Annotation[],
  vp: Viewport,
  px: number,
  py: number,
  reach = NOTE_SIZE + 3,
): Annotation | null {
  let best: Annotation | null = null;
  let bestDist = reach;
  for (const note of notes) {
    const [nx, ny] = vp.toPixel(note.p[0], note.p[2]);
    const d = Math.hypot(nx - px, ny - (py + NOTE_SIZE / 2));
    if (d <= bestDist) {
      best = note;
      bestDist = d;
    }
  }
  return best;
}
