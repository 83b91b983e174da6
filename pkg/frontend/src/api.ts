// Typed client for the inference service, with a replayable request log.
//
// Every generation/edit request is recorded together with the equivalent
// CLI invocation, so an exported log can be replayed offline and must
// reproduce the displayed images byte for byte.

export interface PaletteEntry {
  id: number;
  name: string;
  hue: number | null;
  rgb: [number, number, number];
}

export interface PaletteResponse {
  classes: PaletteEntry[];
  image_size: number;
}

export interface JobStatus {
  id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
  resized: boolean;
}

export interface GenerateParams {
  layoutPngB64: string;
  guidanceScale: number;
  steps: number;
  seed: number;
  numSamples: number;
}

export interface EditParams {
  sourcePngB64: string;
  layoutPngB64: string;
  maskPngB64: string;
  guidanceScale: number;
  steps: number;
  seed: number;
}

export interface LogEntry {
  kind: "generate" | "edit";
  body: Record<string, unknown>;
  cli: string[];
  imagesB64: string[];
}

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function readError(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    return typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
  } catch {
    return res.statusText;
  }
}

export class StudioClient {
  readonly log: LogEntry[] = [];

  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!res.ok) throw new ServiceError(res.status, await readError(res));
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw new ServiceError(res.status, await readError(res));
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string; model_config: Record<string, unknown> }> {
    return this.getJson("/health");
  }

  palette(): Promise<PaletteResponse> {
    return this.getJson("/palette");
  }

  jobStatus(id: string): Promise<JobStatus> {
    return this.getJson(`/jobs/${id}`);
  }

  async jobResult(id: string): Promise<string[]> {
    const res = await this.getJson<{ images: string[] }>(`/jobs/${id}/result`);
    return res.images;
  }

  /** Poll until done/failed; onProgress sees a non-decreasing fraction. */
  async waitForJob(
    id: string,
    onProgress?: (frac: number) => void,
    intervalMs = 150,
    timeoutMs = 600_000,
  ): Promise<JobStatus> {
    const start = Date.now();
    for (;;) {
      const status = await this.jobStatus(id);
      onProgress?.(status.progress);
      if (status.state === "done" || status.state === "failed") return status;
      if (Date.now() - start > timeoutMs) throw new Error(`job ${id} timed out`);
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }

  async generate(p: GenerateParams, onProgress?: (f: number) => void): Promise<string[]> {
    const body = {
      layout_png: p.layoutPngB64,
      guidance_scale: p.guidanceScale,
      steps: p.steps,
      seed: p.seed,
      num_samples: p.numSamples,
    };
    const { job_id } = await this.postJson<{ job_id: string }>("/generate", body);
    const status = await this.waitForJob(job_id, onProgress);
    if (status.state === "failed") throw new Error(status.error ?? "generation failed");
    const images = await this.jobResult(job_id);
    this.log.push({
      kind: "generate",
      body,
      cli: [
        "sample",
        "--layout", "{layout.png}",
        "--seed", String(p.seed),
        "--steps", String(p.steps),
        "--guidance-scale", String(p.guidanceScale),
        "--num-samples", String(p.numSamples),
      ],
      imagesB64: images,
    });
    return images;
  }

  async edit(p: EditParams, onProgress?: (f: number) => void): Promise<string> {
    const body = {
      source_png: p.sourcePngB64,
      layout_png: p.layoutPngB64,
      mask_png: p.maskPngB64,
      guidance_scale: p.guidanceScale,
      steps: p.steps,
      seed: p.seed,
    };
    const { job_id } = await this.postJson<{ job_id: string }>("/edit", body);
    const status = await this.waitForJob(job_id, onProgress);
    if (status.state === "failed") throw new Error(status.error ?? "edit failed");
    const images = await this.jobResult(job_id);
    this.log.push({
      kind: "edit",
      body,
      cli: [
        "edit",
        "--source", "{source.png}",
        "--layout", "{layout.png}",
        "--mask", "{mask.png}",
        "--seed", String(p.seed),
        "--steps", String(p.steps),
        "--guidance-scale", String(p.guidanceScale),
      ],
      imagesB64: images,
    });
    return images[0];
  }

  /** Serializable record of every request plus the bytes displayed. */
  exportLog(): string {
    return JSON.stringify({ version: 1, entries: this.log }, null, 2);
  }
}

// Buffer exists under node (tests); browsers take the atob/btoa path.
const nodeBuffer = (globalThis as { Buffer?: { from(d: unknown, e?: string): Uint8Array & { toString(e: string): string } } }).Buffer;

export function b64encode(bytes: Uint8Array): string {
  if (nodeBuffer) return nodeBuffer.from(bytes).toString("base64");
  let bin = "";
  bytes.forEach((b) => (bin += String.fromCharCode(b)));
  return btoa(bin);
}

export function b64decode(s: string): Uint8Array {
  if (nodeBuffer) return new Uint8Array(nodeBuffer.from(s, "base64"));
  const bin = atob(s);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}
