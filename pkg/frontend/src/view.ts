// DOM construction and rendering. Every number shown comes from the API
// response or the fetched weights; the only local arithmetic is display
// rounding and bar scaling.

import type { ScoreResponse, WeightsInfo } from "./api.js";
import { ATTRIBUTES, type AttributeMode, type ChecklistState } from "./state.js";

export const REFERRAL_SCORE = 3; // clinic rule: total of three or more refers

export function formatScore3(x: number): string {
  return x.toFixed(3);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export interface ViewHandles {
  root: HTMLElement;
  banner: HTMLElement;
  form: HTMLElement;
  weightsPanel: HTMLElement;
  traditionalPanel: HTMLElement;
  learnedPanel: HTMLElement;
  errorBox: HTMLElement;
}

export function buildLayout(root: HTMLElement): ViewHandles {
  root.replaceChildren();
  const banner = el("div", "offline-banner");
  banner.hidden = true;
  banner.setAttribute("role", "alert");
  banner.textContent = "Scoring service unreachable. Inputs are disabled until it returns.";

  const form = el("div", "attribute-form");
  const weightsPanel = el("section", "weights-panel");
  const errorBox = el("div", "error-box");
  errorBox.hidden = true;

  const results = el("section", "results");
  const traditionalPanel = el("div", "panel traditional-panel");
  const learnedPanel = el("div", "panel learned-panel");
  results.append(traditionalPanel, learnedPanel);

  root.append(banner, form, errorBox, results, weightsPanel);
  return { root, banner, form, weightsPanel, traditionalPanel, learnedPanel, errorBox };
}

export interface FormCallbacks {
  onModeChange(index: number, mode: AttributeMode): void;
  onSliderChange(index: number, value: number): void;
  onWhatIfChange(value: number | null): void;
}

export function renderForm(
  handles: ViewHandles,
  state: ChecklistState,
  callbacks: FormCallbacks,
): void {
  const form = handles.form;
  form.replaceChildren();
  ATTRIBUTES.forEach((attr, index) => {
    const input = state.attributes[index]!;
    const fieldset = el("fieldset", attr.major ? "attribute major" : "attribute minor");
    const legend = el("legend", undefined, `${attr.label} (${attr.major ? "major" : "minor"})`);
    fieldset.appendChild(legend);

    for (const mode of ["absent", "present", "slider"] as const) {
      const label = el("label", "mode-option");
      const radio = el("input");
      radio.type = "radio";
      radio.name = `mode-${attr.key}`;
      radio.value = mode;
      radio.checked = input.mode === mode;
      radio.addEventListener("change", () => callbacks.onModeChange(index, mode));
      label.append(radio, document.createTextNode(mode === "slider" ? "uncertain" : mode));
      fieldset.appendChild(label);
    }

    const slider = el("input", "confidence-slider");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(input.sliderValue);
    slider.disabled = input.mode !== "slider";
    slider.setAttribute("aria-label", `${attr.label} probability`);
    slider.addEventListener("input", () => callbacks.onSliderChange(index, Number(slider.value)));
    fieldset.appendChild(slider);
    const sliderValue = el("span", "slider-value", input.mode === "slider" ? input.sliderValue.toFixed(2) : "");
    fieldset.appendChild(sliderValue);

    form.appendChild(fieldset);
  });

  const whatIf = el("fieldset", "what-if");
  whatIf.appendChild(el("legend", undefined, "What-if referral threshold"));
  const slider = el("input");
  slider.type = "range";
  slider.min = "0.5";
  slider.max = "0.75";
  slider.step = "0.001";
  slider.value = String(state.whatIfThreshold ?? 0.62);
  slider.setAttribute("aria-label", "what-if referral threshold");
  slider.addEventListener("input", () => callbacks.onWhatIfChange(Number(slider.value)));
  whatIf.appendChild(slider);
  form.appendChild(whatIf);
}

export function setInputsDisabled(handles: ViewHandles, disabled: boolean): void {
  handles.form
    .querySelectorAll<HTMLInputElement>("input")
    .forEach((input) => {
      if (input.type === "radio") {
        input.disabled = disabled;
      } else if (disabled) {
        input.disabled = true;
      }
    });
}

export function renderOffline(handles: ViewHandles, offline: boolean): void {
  handles.banner.hidden = !offline;
  if (offline) {
    // never leave a stale score visible while unreachable
    handles.traditionalPanel.replaceChildren();
    handles.learnedPanel.replaceChildren();
    setInputsDisabled(handles, true);
  } else {
    setInputsDisabled(handles, false);
  }
}

export function renderFieldErrors(handles: ViewHandles, messages: string[]): void {
  handles.errorBox.hidden = messages.length === 0;
  handles.errorBox.replaceChildren(
    ...messages.map((message) => el("div", "field-error", message)),
  );
}

export function renderWeights(handles: ViewHandles, weights: WeightsInfo): void {
  const panel = handles.weightsPanel;
  panel.replaceChildren(el("h2", undefined, "Attribute weights"));
  const learnedSum = weights.learned.reduce((a, b) => a + b, 0);
  const traditionalSum = weights.traditional.reduce((a, b) => a + b, 0);
  ATTRIBUTES.forEach((attr, index) => {
    const row = el("div", "weight-row");
    row.appendChild(el("span", "weight-name", attr.key));
    for (const [cls, value, total] of [
      ["bar traditional", weights.traditional[index]!, traditionalSum],
      ["bar learned", weights.learned[index]!, learnedSum],
    ] as const) {
      const bar = el("div", cls);
      bar.style.width = `${(100 * value) / total}%`;
      bar.title = formatScore3(value);
      row.appendChild(bar);
    }
    panel.appendChild(row);
  });
}

export function renderComparison(
  handles: ViewHandles,
  response: ScoreResponse,
  whatIfThreshold: number | null,
): void {
  const traditional = handles.traditionalPanel;
  traditional.replaceChildren(
    el("h2", undefined, "Traditional score"),
    el("div", "big-number traditional-score", String(response.traditional_score)),
    el("div", "scale", `0 to 10, referral at ${REFERRAL_SCORE} or more`),
    el(
      "div",
      response.referral.traditional ? "referral yes" : "referral no",
      response.referral.traditional ? "Referral" : "Below referral",
    ),
  );

  const learned = handles.learnedPanel;
  const probability = formatScore3(response.melanoma_probability);
  learned.replaceChildren(
    el("h2", undefined, "Learned melanoma probability"),
    el("div", "big-number melanoma-probability", probability),
    el("div", "scale", `weighted average ${formatScore3(response.weighted_average)}`),
    el("div", "scale threshold", `stored threshold ${formatScore3(response.threshold_used)}`),
    el(
      "div",
      response.referral.learned ? "referral yes" : "referral no",
      response.referral.learned ? "Above stored threshold" : "Below stored threshold",
    ),
  );
  if (whatIfThreshold !== null) {
    const above = response.melanoma_probability >= whatIfThreshold;
    learned.appendChild(
      el(
        "div",
        "what-if-marker",
        `what-if ${formatScore3(whatIfThreshold)}: ${above ? "refer" : "observe"}`,
      ),
    );
  }
}
