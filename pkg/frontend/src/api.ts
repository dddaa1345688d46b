/** Typed client for the server's /api endpoints. Every UI control funnels
 * through exactly one method here, so a fetch log audits one-to-one. */

import type {
  Annotation,
  AnnotationListing,
  FilterState,
  Frame,
  HeatmapGridInfo,
  LoadResponse,
  Metrics,
  SessionListing,
  TransportState,
  Vec3,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(res: Response): Promise<string> {
  try {
    const body: unknown = await res.json();
    if (body && typeof body === "object" && "detail" in body) {
      const d = (body as { detail: unknown }).detail;
      if (typeof d === "string") return d;
    }
  } catch {
    // fall through to the status line
  }
  return `${res.status} ${res.statusText}`;
}

export interface HeatmapImage {
  blob: Blob;
  grid: HeatmapGridInfo;
}

export class ApiClient {
  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.base + path);
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  listSessions(): Promise<SessionListing> {
    return this.getJson("/api/sessions");
  }

  load(paths: string[]): Promise<LoadResponse> {
    return this.postJson("/api/load", { paths });
  }

  transport(cmd: string, t?: number): Promise<TransportState> {
    return this.postJson("/api/transport", t === undefined ? { cmd } : { cmd, t });
  }

  frame(): Promise<Frame> {
    return this.getJson("/api/frame");
  }

  trails(t: number): Promise<{ t: number; trails: Frame["trails"] }> {
    return this.getJson(`/api/trails?t=${encodeURIComponent(t)}`);
  }

  getFilters(): Promise<FilterState> {
    return this.getJson("/api/filters");
  }

  setFilters(update: Partial<FilterState>): Promise<FilterState> {
    return this.postJson("/api/filters", update);
  }

  listAnnotations(): Promise<AnnotationListing> {
    return this.getJson("/api/annotations");
  }

  addAnnotation(p: Vec3, text: string, author?: string): Promise<Annotation> {
    const body: Record<string, unknown> = { p, text };
    if (author !== undefined) body.author = author;
    return this.postJson("/api/annotations", body);
  }

  metrics(): Promise<Metrics> {
    return this.getJson("/api/metrics");
  }

  /** Fetch the density raster; toggle=true tells the server the analyst
   * flipped the overlay on (it counts toward the usage metrics). */
  async heatmapImage(toggle: boolean): Promise<HeatmapImage> {
    const path = `/api/heatmap.png${toggle ? "?toggle=true" : ""}`;
    const res = await this.fetchFn(this.base + path);
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    const grid: HeatmapGridInfo = {
      originX: Number(res.headers.get("X-Grid-Origin-X")),
      originZ: Number(res.headers.get("X-Grid-Origin-Z")),
      cellSize: Number(res.headers.get("X-Grid-Cell-Size")),
      cols: Number(res.headers.get("X-Grid-Cols")),
      rows: Number(res.headers.get("X-Grid-Rows")),
    };
    return { blob: await res.blob(), grid };
  }
}
