/** Wire types mirroring the server's JSON responses. */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];
export type Rgb = [number, number, number];

export interface TransportState {
  mode: "Stopped" | "Playing" | "Paused";
  direction: "Forward" | "Backward";
  rate: number;
  t: number;
  duration_max: number;
}

export interface CameraInfo {
  vfov: number;
  aspect: number;
  near: number;
  far: number;
}

export interface FrameObject {
  session: number;
  id: string;
  name: string;
  category: string;
  color: Rgb;
  p: Vec3;
  q: Quat;
  joints?: Vec3[];
  side?: string;
  camera?: CameraInfo;
}

export interface StaticMarker {
  session: number;
  id: string;
  name: string;
  color: Rgb;
  p: Vec3;
  q: Quat;
  extent?: Vec3;
}

export interface TrailLine {
  session: number;
  id: string;
  color: Rgb;
  /** [t, x, y, z] per point, oldest first. */
  points: [number, number, number, number][];
}

export interface EventMarker {
  session: number;
  kind: "input" | "audio";
  t: number;
  label: string;
  detail: string;
  p: Vec3;
}

export interface Frame {
  t: number;
  transport: TransportState;
  objects: FrameObject[];
  statics: StaticMarker[];
  trails: TrailLine[];
  events: EventMarker[];
}

export interface SessionEntry {
  path: string;
  session_id?: string;
  game?: string;
  started_at?: string;
  sample_hz?: number;
  error?: string;
}

export interface SessionListing {
  sessions: SessionEntry[];
  loaded: string[];
}

export interface LoadedSession {
  path: string;
  session_id: string;
  color: Rgb;
  duration: number;
}

export interface LoadResponse {
  sessions: LoadedSession[];
  duration_max: number;
}

export interface HeatmapGridInfo {
  originX: number;
  originZ: number;
  cellSize: number;
  cols: number;
  rows: number;
}

export interface FilterState {
  categories: string[];
  objects: Record<string, boolean>;
  sessions: boolean[] | null;
}

export interface Annotation {
  id: string;
  p: Vec3;
  t: number;
  text: string;
  created_at: string;
  author?: string;
}

export interface AnnotationListing {
  annotations: Annotation[];
}

export type Metrics = Record<string, number>;
