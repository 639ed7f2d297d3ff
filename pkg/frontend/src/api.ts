/** Thin client for the tfpc HTTP API; all responses validate before use. */

import { BrushConditionJson, PlotModel, validatePlotModel } from "./model.js";

export interface UploadResult {
  session: string;
  n: number;
  p: number;
  columns: string[];
}

export interface PlotParams {
  lines: number;
  nlevels: number;
  method: string;
  naexp: number;
  k?: number;
  locmax?: boolean;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

/** The server surface the explorer consumes (ApiClient implements it). */
export interface PlotApi {
  uploadDataset(csv: string | Blob): Promise<UploadResult>;
  fetchPlot(session: string, params: PlotParams): Promise<PlotModel>;
  postBrush(session: string, conditions: BrushConditionJson[]): Promise<PlotModel>;
  postOrder(session: string, order: string[]): Promise<PlotModel>;
}

async function reject(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient implements PlotApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async uploadDataset(csv: string | Blob): Promise<UploadResult> {
    const response = await this.fetchFn(`${this.baseUrl}/datasets`, {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
    if (!response.ok) await reject(response);
    return (await response.json()) as UploadResult;
  }

  async fetchPlot(session: string, params: PlotParams): Promise<PlotModel> {
    const query = new URLSearchParams({
      lines: String(params.lines),
      nlevels: String(params.nlevels),
      method: params.method,
      naexp: String(params.naexp),
    });
    if (params.k !== undefined) query.set("k", String(params.k));
    if (params.locmax) query.set("locmax", "true");
    const response = await this.fetchFn(
      `${this.baseUrl}/sessions/${session}/plot?${query.toString()}`,
    );
    if (!response.ok) await reject(response);
    return validatePlotModel(await response.json());
  }

  async postBrush(session: string, conditions: BrushConditionJson[]): Promise<PlotModel> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${session}/brush`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(conditions),
    });
    if (!response.ok) await reject(response);
    return validatePlotModel(await response.json());
  }

  async postOrder(session: string, order: string[]): Promise<PlotModel> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${session}/order`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ order }),
    });
    if (!response.ok) await reject(response);
    return validatePlotModel(await response.json());
  }

  async fetchFrequencies(session: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${session}/frequencies`);
    if (!response.ok) await reject(response);
    return response.text();
  }
}
