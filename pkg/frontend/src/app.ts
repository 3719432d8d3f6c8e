/** Browser UI for listening sessions.
 *
 * Participants get custom play buttons instead of native <audio>
 * controls: there is no seek bar, and a sample only counts as heard
 * when its 'ended' event fires, matching the server-side gate.
 */

import { ApiClient } from './client.js';
import { PlaybackGate, TrialFlow } from './gate.js';
import type {
  AbManifestItem,
  ManifestItem,
  MosManifestItem,
  SessionManifest,
} from './types.js';
import { isAbItem } from './types.js';

const api = new ApiClient();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function root(): HTMLElement {
  const app = document.getElementById('app');
  if (!app) throw new Error('missing #app container');
  app.replaceChildren();
  return app;
}

/** One play-to-completion audio control: button + hidden Audio. */
function playControl(
  label: string,
  url: string,
  onComplete: () => void,
): HTMLElement {
  const audio = new Audio(api.audioUrl(url));
  audio.preload = 'auto';
  const btn = el('button', { class: 'play' }, `▶ ${label}`);
  let heard = false;

  btn.addEventListener('click', () => {
    if (audio.paused) {
      void audio.play();
      btn.textContent = `❚❚ ${label}`;
    } else {
      audio.pause();
      btn.textContent = `▶ ${label}`;
    }
  });
  audio.addEventListener('ended', () => {
    heard = true;
    audio.currentTime = 0;
    btn.textContent = `✓ ${label}`;
    btn.classList.add('heard');
    onComplete();
  });
  audio.addEventListener('pause', () => {
    if (!heard && !audio.ended) btn.textContent = `▶ ${label}`;
  });

  const wrap = el('div', { class: 'sample' });
  wrap.append(btn);
  return wrap;
}

function sessionIdFromLocation(): string {
  // served as /?session=<id>; fall back to a path segment /s/<id>
  const q = new URLSearchParams(window.location.search).get('session');
  if (q) return q;
  const m = window.location.pathname.match(/\/s\/([^/]+)/);
  if (m?.[1]) return decodeURIComponent(m[1]);
  return '';
}

function renderStart(): void {
  const app = root();
  app.append(el('h1', {}, 'Listening test'));
  const form = el('form');
  const input = el('input', {
    type: 'text',
    placeholder: 'Your name or id',
    autocomplete: 'off',
  });
  const go = el('button', { type: 'submit' }, 'Begin');
  const note = el('p', { class: 'error' });
  form.append(input, go, note);
  app.append(
    el(
      'p',
      {},
      'You will hear short music excerpts in pairs or small groups. ' +
        'Use headphones, set a comfortable volume, and listen to every ' +
        'sample all the way through before answering.',
    ),
    form,
  );

  form.addEventListener('submit', (ev) => {
    ev.preventDefault();
    const participant = input.value.trim();
    if (!participant) {
      note.textContent = 'Please enter a name or id.';
      return;
    }
    const sessionId = sessionIdFromLocation();
    if (!sessionId) {
      note.textContent = 'No session id in the URL (expected ?session=...).';
      return;
    }
    api
      .manifest(sessionId, participant)
      .then((man) => renderTrial(man, participant, new TrialFlow(man.items)))
      .catch((e: unknown) => {
        note.textContent = e instanceof Error ? e.message : String(e);
      });
  });
}

function renderTrial(
  man: SessionManifest,
  participant: string,
  flow: TrialFlow<ManifestItem>,
): void {
  if (flow.finished) {
    renderDone();
    return;
  }
  const app = root();
  app.append(el('h1', {}, flow.progressLabel));
  if (flow.current.is_practice) {
    app.append(
      el('p', {}, 'This one is for practice — your answer is not scored.'),
    );
  }
  const item = flow.current;
  if (isAbItem(item)) {
    renderAbTrial(app, man, participant, flow, item);
  } else {
    renderMosTrial(app, man, participant, flow, item);
  }
}

function renderAbTrial(
  app: HTMLElement,
  man: SessionManifest,
  participant: string,
  flow: TrialFlow<ManifestItem>,
  item: AbManifestItem,
): void {
  const gate = new PlaybackGate(['a', 'b']);
  const error = el('p', { class: 'error' });
  const choices = el('div', { class: 'choices' });
  const prefA = el('button', { disabled: '' }, 'Choose A');
  const prefB = el('button', { disabled: '' }, 'Choose B');
  choices.append(prefA, prefB);

  const refresh = () => {
    const ok = gate.ready;
    prefA.toggleAttribute('disabled', !ok);
    prefB.toggleAttribute('disabled', !ok);
    error.textContent = ok
      ? ''
      : `Listen to ${gate.missing.map((k) => k.toUpperCase()).join(' and ')} in full to answer.`;
  };

  app.append(
    playControl('Sample A', item.sample_a, () => {
      gate.markComplete('a');
      refresh();
    }),
    playControl('Sample B', item.sample_b, () => {
      gate.markComplete('b');
      refresh();
    }),
    el('p', {}, 'Listen to both samples, then choose the one containing fewer artifacts.'),
    choices,
    error,
  );
  refresh();

  const submit = (choice: 'A' | 'B') => {
    prefA.setAttribute('disabled', '');
    prefB.setAttribute('disabled', '');
    api
      .submit({
        session: man.id,
        protocol: 'AB',
        participant,
        trial: item.id,
        choice,
        timestamp: new Date().toISOString(),
        playback_complete: gate.payload(),
      })
      .then((res) => {
        if (res.ok) {
          flow.advance();
          renderTrial(man, participant, flow);
        } else {
          error.textContent = res.error ?? 'The server rejected the answer.';
          refresh();
        }
      })
      .catch((e: unknown) => {
        error.textContent = e instanceof Error ? e.message : String(e);
        refresh();
      });
  };
  prefA.addEventListener('click', () => submit('A'));
  prefB.addEventListener('click', () => submit('B'));
}

function renderMosTrial(
  app: HTMLElement,
  man: SessionManifest,
  participant: string,
  flow: TrialFlow<ManifestItem>,
  item: MosManifestItem,
): void {
  const gate = new PlaybackGate(['reference', ...item.stimuli.map((s) => s.id)]);
  const ratings = new Map<string, number>();
  const error = el('p', { class: 'error' });
  const send = el('button', { disabled: '' }, 'Submit ratings');

  const refresh = () => {
    const ok = gate.ready && ratings.size === item.stimuli.length;
    send.toggleAttribute('disabled', !ok);
    error.textContent = gate.ready
      ? ''
      : 'Listen to the reference and every sample in full before rating.';
  };

  const anchors = ['bad', 'poor', 'fair', 'good', 'excellent'];
  app.append(
    el(
      'p',
      {},
      'Listen to the reference, then rate how similar each sample is ' +
        'to it: 1 (bad) to 5 (excellent, closest to the reference).',
    ),
    playControl('Reference', item.reference, () => {
      gate.markComplete('reference');
      refresh();
    }),
  );

  item.stimuli.forEach((stim, i) => {
    const row = el('div', { class: 'mos-row' });
    row.append(
      playControl(`Sample ${i + 1}`, stim.url, () => {
        gate.markComplete(stim.id);
        refresh();
      }),
    );
    const scale = el('div', { class: 'scale' });
    for (let score = 1; score <= 5; score++) {
      const lab = el('label', { title: anchors[score - 1] ?? '' });
      const radio = el('input', {
        type: 'radio',
        name: `rating-${stim.id}`,
        value: String(score),
      });
      radio.addEventListener('change', () => {
        ratings.set(stim.id, score);
        refresh();
      });
      lab.append(radio, document.createTextNode(`${score} ${anchors[score - 1] ?? ''}`));
      scale.append(lab);
    }
    row.append(scale);
    app.append(row);
  });
  app.append(send, error);
  refresh();

  send.addEventListener('click', () => {
    send.setAttribute('disabled', '');
    const payload = gate.payload();
    // one record per rated stimulus, all sharing the playback proof
    const posts = item.stimuli.map((stim) =>
      api.submit({
        session: man.id,
        protocol: 'MOS',
        participant,
        trial: item.id,
        choice: ratings.get(stim.id) as number,
        stimulus: stim.id,
        timestamp: new Date().toISOString(),
        playback_complete: payload,
      }),
    );
    Promise.all(posts)
      .then((results) => {
        const bad = results.find((r) => !r.ok);
        if (bad) {
          error.textContent = bad.error ?? 'The server rejected a rating.';
          refresh();
        } else {
          flow.advance();
          renderTrial(man, participant, flow);
        }
      })
      .catch((e: unknown) => {
        error.textContent = e instanceof Error ? e.message : String(e);
        refresh();
      });
  });
}

function renderDone(): void {
  const app = root();
  app.append(
    el('h1', {}, 'All done'),
    el('p', {}, 'Thank you — your answers have been recorded. You can close this tab.'),
  );
}

renderStart();
