/** Wire types for the listening-test HTTP API. */

export interface AbManifestItem {
  id: string;
  is_practice: boolean;
  /** Blinded audio URLs (/api/audio/<token>) — no filenames, no conditions. */
  sample_a: string;
  sample_b: string;
}

export interface MosStimulus {
  /** Blinded stimulus id; echoed back in the response record. */
  id: string;
  url: string;
}

export interface MosManifestItem {
  id: string;
  is_practice: boolean;
  reference: string;
  stimuli: MosStimulus[];
}

export type ManifestItem = AbManifestItem | MosManifestItem;

export interface SessionManifest {
  id: string;
  protocol: 'AB' | 'MOS';
  randomize: boolean;
  participant_fields: string[];
  items: ManifestItem[];
}

export interface ResponseRecord {
  session: string;
  protocol: 'AB' | 'MOS';
  participant: string;
  trial: string;
  /** 'A' | 'B' for AB sessions, an integer 1..5 for MOS. */
  choice: 'A' | 'B' | number;
  /** MOS only: blinded id of the stimulus being rated. */
  stimulus?: string;
  /** Client-side submission time, ISO 8601. */
  timestamp: string;
  /** Which samples finished playing, keyed as the server expects. */
  playback_complete: Record<string, boolean>;
}

export interface SubmitResult {
  ok: boolean;
  error?: string;
}

export function isAbItem(item: ManifestItem): item is AbManifestItem {
  return 'sample_a' in item;
}
