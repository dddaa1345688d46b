/** Viewer application: panels, canvas, and the polling loop.
 *
 * All state of record lives on the server; this module only caches the
 * latest responses for drawing. Each control issues exactly one request
 * to its endpoint, so a network log audits one-to-one against clicks.
 */

import { ApiClient, ApiError } from "./api";
import { pitchOf } from "./geometry";
import { Poller } from "./poller";
import { Renderer, hitAnnotation, hitEvent, cssColor } from "./renderer";
import type { Ctx2D, OverlayState } from "./renderer";
import type { Annotation, FilterState, Frame, LoadedSession } from "./types";
import { Viewport, extendBounds, paddedBounds } from "./viewport";
import type { WorldBounds } from "./viewport";

export const FILTER_GROUPS = [
  "Player",
  "Camera",
  "Hand",
  "AudioSource",
  "Custom",
  "Statics",
  "Inputs",
  "Audio",
  "Trails",
] as const;

const CANVAS_W = 800;
const CANVAS_H = 600;

export interface AppOptions {
  api?: ApiClient;
  createContext?: (canvas: HTMLCanvasElement) => Ctx2D | null;
  imageFromBlob?: (blob: Blob) => Promise<CanvasImageSource>;
  pollIntervalMs?: number;
  /** Browser speech-to-text into the note box; off by default. */
  speechInput?: boolean;
}

interface Elements {
  status: HTMLElement;
  sessionList: HTMLElement;
  loadBtn: HTMLButtonElement;
  legend: HTMLElement;
  timeLabel: HTMLElement;
  scrubber: HTMLInputElement;
  filters: HTMLElement;
  heatmapBtn: HTMLButtonElement;
  armBtn: HTMLButtonElement;
  noteForm: HTMLElement;
  noteText: HTMLTextAreaElement;
  noteSave: HTMLButtonElement;
  noteCancel: HTMLButtonElement;
  noteError: HTMLElement;
  noteList: HTMLElement;
  detail: HTMLElement;
  canvas: HTMLCanvasElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  props: Partial<HTMLElementTagNameMap[K]> & { className?: string } = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  Object.assign(node, props);
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export class App {
  private readonly api: ApiClient;
  private readonly ui: Elements;
  private readonly renderer: Renderer;
  private readonly poller: Poller<Frame>;
  private readonly imageFromBlob: (blob: Blob) => Promise<CanvasImageSource>;

  private lastFrame: Frame | null = null;
  private viewport: Viewport;
  private bounds: WorldBounds = { minX: -1, minZ: -1, maxX: 1, maxZ: 1 };
  private legendEntries: LoadedSession[] = [];
  private filters: FilterState = { categories: [...FILTER_GROUPS], objects: {}, sessions: null };
  private overlay: OverlayState | null = null;
  private overlayOn = false;
  private notes: Annotation[] = [];
  private annotateArmed = false;
  private pendingAnchor: [number, number] | null = null;
  private scrubbing = false;
  private durationMax = 0;

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.api = options.api ?? new ApiClient();
    this.imageFromBlob = options.imageFromBlob ?? ((blob) => createImageBitmap(blob));
    this.ui = this.buildDom(root, options.speechInput === true);

    const getCtx = options.createContext ?? ((c: HTMLCanvasElement) => c.getContext("2d"));
    const ctx = getCtx(this.ui.canvas);
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.renderer = new Renderer(ctx, CANVAS_W, CANVAS_H);
    this.viewport = new Viewport(this.bounds, CANVAS_W, CANVAS_H);

    this.poller = new Poller(
      () => this.api.frame(),
      (frame) => this.onFrame(frame),
      (err) => this.onPollError(err),
      { intervalMs: options.pollIntervalMs ?? 100 },
    );
  }

  /** Fetch the session listing, filters, and saved notes. */
  async start(): Promise<void> {
    try {
      const listing = await this.api.listSessions();
      this.renderSessionList(listing.sessions, listing.loaded);
      if (listing.loaded.length > 0) this.poller.start();
    } catch (err) {
      this.banner(describe(err), "error");
    }
    try {
      this.filters = await this.api.getFilters();
      this.renderFilters();
    } catch {
      this.renderFilters(); // defaults; server may have nothing loaded yet
    }
    try {
      this.notes = (await this.api.listAnnotations()).annotations;
      this.renderNoteList();
    } catch {
      // annotations are cosmetic at startup; the next action refreshes them
    }
  }

  dispose(): void {
    this.poller.stop();
  }

  // -- DOM ------------------------------------------------------------------

  private buildDom(root: HTMLElement, speech: boolean): Elements {
    const status = el("div", { className: "banner hidden", id: "status" });

    const sessionList = el("div", { className: "session-list", id: "session-list" });
    const loadBtn = el("button", { textContent: "Load selected", id: "btn-load" });
    const legend = el("div", { className: "legend", id: "legend" });

    const mkTransport = (label: string, cmd: string): HTMLButtonElement => {
      const b = el("button", { textContent: label, id: `btn-${cmd}` });
      b.addEventListener("click", () => void this.sendTransport(cmd));
      return b;
    };
    const timeLabel = el("span", { className: "time-label", id: "time-label", textContent: "-" });
    const scrubber = el("input", { id: "scrubber" }) as HTMLInputElement;
    scrubber.type = "range";
    scrubber.min = "0";
    scrubber.max = "0";
    scrubber.step = "0.01";
    scrubber.value = "0";

    const filters = el("div", { className: "filter-list", id: "filter-list" });
    const heatmapBtn = el("button", { textContent: "Heatmap: off", id: "btn-heatmap" });

    const armBtn = el("button", { textContent: "Add note", id: "btn-annotate" });
    const noteText = el("textarea", { id: "note-text", rows: 3 }) as HTMLTextAreaElement;
    const noteSave = el("button", { textContent: "Save", id: "btn-note-save" });
    const noteCancel = el("button", { textContent: "Cancel", id: "btn-note-cancel" });
    const noteError = el("span", { className: "field-error", id: "note-error" });
    const noteFormKids: (Node | string)[] = [noteText];
    if (speech && "webkitSpeechRecognition" in window) {
      // Feature-flagged dictation into the note box; not exercised in CI.
      const mic = el("button", { textContent: "Dictate", id: "btn-dictate" });
      mic.addEventListener("click", () => {
        type RecognitionCtor = new () => {
          onresult: (ev: { results: { [i: number]: { [j: number]: { transcript: string } } } }) => void;
          start(): void;
        };
        const Ctor = (window as unknown as { webkitSpeechRecognition: RecognitionCtor })
          .webkitSpeechRecognition;
        const rec = new Ctor();
        rec.onresult = (ev) => {
          noteText.value += ev.results[0][0].transcript;
        };
        rec.start();
      });
      noteFormKids.push(mic);
    }
    noteFormKids.push(noteSave, noteCancel, noteError);
    const noteForm = el("div", { className: "note-form hidden", id: "note-form" }, noteFormKids);
    const noteList = el("div", { className: "note-list", id: "note-list" });

    const detail = el("div", { className: "detail", id: "detail" });

    const canvas = el("canvas", { id: "stage" });
    canvas.width = CANVAS_W;
    canvas.height = CANVAS_H;

    const aside = el("aside", { className: "panel" }, [
      el("h2", { textContent: "Sessions" }),
      sessionList,
      loadBtn,
      legend,
      el("h2", { textContent: "Transport" }),
      el("div", { className: "transport-buttons" }, [
        mkTransport("Play", "play"),
        mkTransport("Pause", "pause"),
        mkTransport("Resume", "resume"),
        mkTransport("Rewind", "rewind"),
        mkTransport("FFwd", "fast_forward"),
        mkTransport("Stop", "stop"),
      ]),
      el("div", { className: "scrub-row" }, [scrubber, timeLabel]),
      el("h2", { textContent: "Filters" }),
      filters,
      el("h2", { textContent: "Heatmap" }),
      heatmapBtn,
      el("h2", { textContent: "Annotations" }),
      armBtn,
      noteForm,
      noteList,
      el("h2", { textContent: "Detail" }),
      detail,
    ]);

    root.append(status, el("div", { className: "layout" }, [aside, canvas]));

    loadBtn.addEventListener("click", () => void this.loadSelected());
    heatmapBtn.addEventListener("click", () => void this.toggleHeatmap());
    armBtn.addEventListener("click", () => this.armAnnotate());
    noteSave.addEventListener("click", () => void this.submitNote());
    noteCancel.addEventListener("click", () => this.cancelNote());
    canvas.addEventListener("click", (ev) => this.onCanvasClick(ev));
    scrubber.addEventListener("pointerdown", () => {
      this.scrubbing = true;
    });
    scrubber.addEventListener("pointerup", () => {
      this.scrubbing = false;
    });
    scrubber.addEventListener("change", () => {
      this.scrubbing = false;
      void this.sendTransport("seek", Number(scrubber.value));
    });

    return {
      status,
      sessionList,
      loadBtn,
      legend,
      timeLabel,
      scrubber,
      filters,
      heatmapBtn,
      armBtn,
      noteForm,
      noteText,
      noteSave,
      noteCancel,
      noteError,
      noteList,
      detail,
      canvas,
    };
  }

  private banner(text: string, kind: "error" | "info"): void {
    this.ui.status.textContent = text;
    this.ui.status.className = `banner ${kind}`;
  }

  private clearBanner(): void {
    this.ui.status.className = "banner hidden";
    this.ui.status.textContent = "";
  }

  // -- sessions / legend ------------------------------------------------------

  private renderSessionList(
    sessions: { path: string; session_id?: string; error?: string }[],
    loaded: string[],
  ): void {
    this.ui.sessionList.replaceChildren();
    for (const s of sessions) {
      const row = el("label", { className: "session-row" });
      const box = el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.value = s.path;
      if (s.error) {
        box.disabled = true;
        row.append(box, `${s.path} (unreadable)`);
      } else {
        box.checked = loaded.includes(s.path);
        row.append(box, `${s.session_id ?? s.path}`);
      }
      this.ui.sessionList.append(row);
    }
  }

  private async loadSelected(): Promise<void> {
    const picked = Array.from(
      this.ui.sessionList.querySelectorAll<HTMLInputElement>("input:checked"),
    ).map((box) => box.value);
    if (picked.length === 0) {
      this.banner("pick at least one session", "info");
      return;
    }
    try {
      const res = await this.api.load(picked);
      this.clearBanner();
      this.legendEntries = res.sessions;
      this.durationMax = res.duration_max;
      this.ui.scrubber.max = String(res.duration_max);
      this.overlay = null;
      this.overlayOn = false;
      this.ui.heatmapBtn.textContent = "Heatmap: off";
      this.bounds = { minX: -1, minZ: -1, maxX: 1, maxZ: 1 };
      this.renderLegend();
      this.poller.start();
    } catch (err) {
      this.banner(describe(err), "error");
      return;
    }
    try {
      this.notes = (await this.api.listAnnotations()).annotations;
      this.renderNoteList();
    } catch {
      // note list refresh is cosmetic; icons update on the next poll
    }
  }

  private renderLegend(): void {
    this.ui.legend.replaceChildren();
    for (const s of this.legendEntries) {
      const swatch = el("span", { className: "swatch" });
      swatch.style.backgroundColor = cssColor(s.color);
      this.ui.legend.append(el("div", { className: "legend-row" }, [swatch, s.session_id]));
    }
  }

  // -- transport ---------------------------------------------------------------

  private async sendTransport(cmd: string, t?: number): Promise<void> {
    try {
      const state = await this.api.transport(cmd, t);
      this.clearBanner();
      this.durationMax = state.duration_max;
      this.ui.scrubber.max = String(state.duration_max);
      this.updateTransportDisplay(state.mode, state.t);
    } catch (err) {
      this.banner(describe(err), "error");
    }
  }

  private updateTransportDisplay(mode: string, t: number): void {
    this.ui.timeLabel.textContent = `${t.toFixed(2)} / ${this.durationMax.toFixed(2)} s (${mode})`;
    if (!this.scrubbing) this.ui.scrubber.value = String(t);
  }

  // -- filters -------------------------------------------------------------------

  private renderFilters(): void {
    this.ui.filters.replaceChildren();
    for (const group of FILTER_GROUPS) {
      const row = el("label", { className: "filter-row" });
      const box = el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.value = group;
      box.checked = this.filters.categories.includes(group);
      box.addEventListener("change", () => void this.applyFilterChange(group, box.checked));
      row.append(box, group);
      this.ui.filters.append(row);
    }
  }

  private async applyFilterChange(group: string, on: boolean): Promise<void> {
    const next = new Set(this.filters.categories);
    if (on) next.add(group);
    else next.delete(group);
    try {
      this.filters = await this.api.setFilters({ categories: [...next] });
      this.clearBanner();
    } catch (err) {
      this.banner(describe(err), "error");
      this.renderFilters(); // snap the boxes back to server truth
    }
  }

  // -- heatmap --------------------------------------------------------------------

  private async toggleHeatmap(): Promise<void> {
    if (this.overlayOn) {
      this.overlayOn = false;
      this.ui.heatmapBtn.textContent = "Heatmap: off";
      this.redraw();
      return;
    }
    try {
      const { blob, grid } = await this.api.heatmapImage(true);
      this.overlay = { image: await this.imageFromBlob(blob), grid };
      this.overlayOn = true;
      this.ui.heatmapBtn.textContent = "Heatmap: on";
      this.clearBanner();
      this.redraw();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.banner("no samples to aggregate for the heatmap", "info");
      } else {
        this.banner(describe(err), "error");
      }
    }
  }

  // -- annotations -------------------------------------------------------------------

  private armAnnotate(): void {
    this.annotateArmed = true;
    this.ui.armBtn.textContent = "Click the map...";
    this.ui.canvas.style.cursor = "crosshair";
  }

  private disarmAnnotate(): void {
    this.annotateArmed = false;
    this.ui.armBtn.textContent = "Add note";
    this.ui.canvas.style.cursor = "default";
  }

  private async submitNote(): Promise<void> {
    const text = this.ui.noteText.value;
    if (text.trim() === "") {
      this.ui.noteError.textContent = "note text must not be empty";
      return;
    }
    if (!this.pendingAnchor) return;
    const [x, z] = this.pendingAnchor;
    try {
      const note = await this.api.addAnnotation([x, 0, z], text);
      this.notes.push(note);
      this.pendingAnchor = null;
      this.ui.noteText.value = "";
      this.ui.noteError.textContent = "";
      this.ui.noteForm.classList.add("hidden");
      this.clearBanner();
      this.renderNoteList();
      this.redraw();
    } catch (err) {
      this.banner(describe(err), "error");
    }
  }

  private cancelNote(): void {
    this.pendingAnchor = null;
    this.ui.noteText.value = "";
    this.ui.noteError.textContent = "";
    this.ui.noteForm.classList.add("hidden");
  }

  private renderNoteList(): void {
    this.ui.noteList.replaceChildren();
    for (const note of this.notes) {
      const row = el("div", {
        className: "note-row",
        textContent: `${note.id} @ ${note.t.toFixed(2)}s: ${note.text}`,
      });
      row.addEventListener("click", () => this.showNoteDetail(note));
      this.ui.noteList.append(row);
    }
  }

  private showNoteDetail(note: Annotation): void {
    const who = note.author ? ` by ${note.author}` : "";
    this.ui.detail.textContent = `${note.id}${who} at t=${note.t.toFixed(2)}s: ${note.text}`;
  }

  // -- canvas interaction -------------------------------------------------------------

  private canvasPoint(ev: MouseEvent): [number, number] {
    const rect = this.ui.canvas.getBoundingClientRect();
    return [ev.clientX - rect.left, ev.clientY - rect.top];
  }

  private onCanvasClick(ev: MouseEvent): void {
    const [px, py] = this.canvasPoint(ev);
    if (this.annotateArmed) {
      this.pendingAnchor = this.viewport.toWorld(px, py);
      this.disarmAnnotate();
      this.ui.noteForm.classList.remove("hidden");
      return;
    }
    if (!this.lastFrame) return;
    const note = hitAnnotation(this.notes, this.viewport, px, py);
    if (note) {
      this.showNoteDetail(note);
      return;
    }
    const event = hitEvent(this.lastFrame, this.viewport, px, py);
    if (event) {
      this.ui.detail.textContent = `${event.kind} "${event.label}" at t=${event.t.toFixed(2)}s: ${event.detail}`;
      return;
    }
    for (const o of this.lastFrame.objects) {
      const [ox, oy] = this.viewport.toPixel(o.p[0], o.p[2]);
      if (Math.hypot(ox - px, oy - py) <= 8) {
        const pitch = o.camera ? `, pitch ${((pitchOf(o.q) * 180) / Math.PI).toFixed(1)} deg` : "";
        this.ui.detail.textContent = `${o.name} (${o.category})${pitch}`;
        return;
      }
    }
  }

  // -- frame handling ------------------------------------------------------------------

  private onFrame(frame: Frame): void {
    this.clearBanner();
    this.lastFrame = frame;
    this.durationMax = frame.transport.duration_max;
    this.ui.scrubber.max = String(frame.transport.duration_max);
    this.updateTransportDisplay(frame.transport.mode, frame.t);
    this.growBounds(frame);
    this.redraw();
  }

  private onPollError(err: unknown): void {
    this.banner(`frame poll failed: ${describe(err)} (retrying)`, "error");
  }

  /** Bounds only grow, so the view never jitters as trails extend. */
  private growBounds(frame: Frame): void {
    let b = this.bounds;
    for (const o of frame.objects) b = extendBounds(b, o.p[0], o.p[2]);
    for (const s of frame.statics) {
      const ex = s.extent ? s.extent[0] / 2 : 0;
      const ez = s.extent ? s.extent[2] / 2 : 0;
      b = extendBounds(extendBounds(b, s.p[0] - ex, s.p[2] - ez), s.p[0] + ex, s.p[2] + ez);
    }
    for (const trail of frame.trails) {
      for (const pt of trail.points) b = extendBounds(b, pt[1], pt[3]);
    }
    if (this.overlay) {
      const g = this.overlay.grid;
      b = extendBounds(
        extendBounds(b, g.originX, g.originZ),
        g.originX + g.cols * g.cellSize,
        g.originZ + g.rows * g.cellSize,
      );
    }
    if (
      b.minX !== this.bounds.minX ||
      b.minZ !== this.bounds.minZ ||
      b.maxX !== this.bounds.maxX ||
      b.maxZ !== this.bounds.maxZ
    ) {
      this.bounds = b;
      this.viewport = new Viewport(paddedBounds(b, 0.5), CANVAS_W, CANVAS_H);
    }
  }

  private redraw(): void {
    if (!this.lastFrame) return;
    this.renderer.draw(
      this.lastFrame,
      this.viewport,
      this.overlayOn ? this.overlay : null,
      this.notes,
    );
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}
