/** Optimization job monitor: polls status on a fixed timer, records the
 * best-objective series for the progress plot, and replays the solution
 * trace step by step. */

import type { ApiClient } from "./api.js";
import type { JobSnapshot, Objective, SolutionDoc, TraceEntry } from "./types.js";

export function compareObjective(a: Objective, b: Objective): number {
  if (a.inconsistent_vertices !== b.inconsistent_vertices) {
    return a.inconsistent_vertices - b.inconsistent_vertices;
  }
  if (a.degree_sum !== b.degree_sum) {
    return a.degree_sum - b.degree_sum;
  }
  return a.mean_nearest_poi_distance_m - b.mean_nearest_poi_distance_m;
}

export interface SeriesPoint {
  iteration: number;
  objective: Objective;
}

export class JobMonitor {
  readonly series: SeriesPoint[] = [];
  finished: JobSnapshot | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly jobId: string,
    private readonly pollMs = 250,
  ) {}

  /** One poll; appends to the series when the best objective is present. */
  async poll(): Promise<JobSnapshot> {
    const snapshot = await this.api.jobStatus(this.jobId);
    const best = snapshot.progress.best_objective;
    if (best) {
      const last = this.series[this.series.length - 1];
      if (!last || compareObjective(best, last.objective) !== 0) {
        this.series.push({ iteration: snapshot.progress.iteration, objective: best });
      }
    }
    if (snapshot.state === "done" || snapshot.state === "cancelled" || snapshot.state === "failed") {
      this.finished = snapshot;
    }
    return snapshot;
  }

  /** Poll on a fixed timer until the job reaches a terminal state. */
  run(onUpdate?: (snapshot: JobSnapshot) => void): Promise<JobSnapshot> {
    return new Promise((resolve, reject) => {
      const tick = async () => {
        try {
          const snapshot = await this.poll();
          onUpdate?.(snapshot);
          if (this.finished) {
            resolve(snapshot);
            return;
          }
          setTimeout(tick, this.pollMs);
        } catch (error) {
          reject(error);
        }
      };
      tick();
    });
  }

  /** The polled best-objective series must never get worse. */
  isNonIncreasing(): boolean {
    for (let i = 1; i < this.series.length; i += 1) {
      if (compareObjective(this.series[i].objective, this.series[i - 1].objective) > 0) {
        return false;
      }
    }
    return true;
  }

  cancel(): Promise<{ job: string; cancelled: boolean }> {
    return this.api.cancelJob(this.jobId);
  }
}

/** Anchor vertex per POI after applying the first `cursor` trace moves to
 * the solution's starting placement. */
export function placementAtStep(
  solution: SolutionDoc,
  initialAnchors: Record<string, number>,
  cursor: number,
): Record<string, number> {
  const anchors = { ...initialAnchors };
  const moves = solution.trace.filter((t: TraceEntry) => t.poi !== null);
  const steps = Math.max(0, Math.min(cursor, moves.length));
  for (let i = 0; i < steps; i += 1) {
    const move = moves[i];
    anchors[move.poi as string] = move.to_vertex as number;
  }
  return anchors;
}
