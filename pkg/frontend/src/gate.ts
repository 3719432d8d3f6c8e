/** Playback gating and trial sequencing — the rules of the test,
 * kept free of DOM so they can be unit-tested.
 *
 * The server refuses a response unless every required sample was
 * played to completion; the gate mirrors that rule client-side so the
 * submit controls only unlock when a submission would be accepted.
 */

export class PlaybackGate {
  private done: Map<string, boolean>;

  /** @param keys payload keys the server requires, e.g. ['a', 'b'] for
   *  an AB trial or ['reference', ...blindedIds] for a MOS trial. */
  constructor(keys: string[]) {
    if (keys.length === 0) {
      throw new Error('a trial needs at least one sample to gate on');
    }
    this.done = new Map(keys.map((k) => [k, false]));
  }

  /** Record that one sample played to its end (an 'ended' event —
   *  pausing or seeking around does not count). Idempotent. */
  markComplete(key: string): void {
    if (!this.done.has(key)) {
      throw new Error(`unknown sample key: ${key}`);
    }
    this.done.set(key, true);
  }

  isComplete(key: string): boolean {
    return this.done.get(key) === true;
  }

  /** True once every required sample has been heard in full. */
  get ready(): boolean {
    for (const v of this.done.values()) {
      if (!v) return false;
    }
    return true;
  }

  /** Keys still missing, for UI hints. */
  get missing(): string[] {
    return [...this.done.entries()].filter(([, v]) => !v).map(([k]) => k);
  }

  /** The playback_complete object to send with the response. */
  payload(): Record<string, boolean> {
    return Object.fromEntries(this.done);
  }
}

export interface FlowItem {
  id: string;
  is_practice: boolean;
}

/** Walks the manifest's trials in order; advancing requires an
 * accepted submission for the current one. */
export class TrialFlow<T extends FlowItem> {
  private idx = 0;
  private readonly evalTotal: number;

  constructor(private readonly items: readonly T[]) {
    if (items.length === 0) {
      throw new Error('session has no trials');
    }
    this.evalTotal = items.filter((t) => !t.is_practice).length;
  }

  get current(): T {
    const item = this.items[this.idx];
    if (item === undefined) {
      throw new Error('session already finished');
    }
    return item;
  }

  get finished(): boolean {
    return this.idx >= this.items.length;
  }

  /** Call after the server accepted the current trial's response. */
  advance(): void {
    if (this.finished) {
      throw new Error('session already finished');
    }
    this.idx += 1;
  }

  /** "Practice" for warm-up trials, then "Trial k of N" counting only
   *  evaluation trials — participants never see how many conditions or
   *  practice items exist beyond their own position. */
  get progressLabel(): string {
    const t = this.current;
    if (t.is_practice) return 'Practice';
    const k = this.items.slice(0, this.idx + 1).filter((x) => !x.is_practice).length;
    return `Trial ${k} of ${this.evalTotal}`;
  }
}
