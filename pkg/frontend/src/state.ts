// Checklist state: one tri-state input per attribute plus a what-if
// referral threshold. Fully serializable into the URL fragment so a case
// can be shared as a link.

export const ATTRIBUTES = [
  { key: "APN", label: "Atypical pigment network", major: true },
  { key: "IR-STR", label: "Irregular streaks", major: false },
  { key: "IR-PIG", label: "Irregular pigmentation", major: false },
  { key: "RS", label: "Regression structures", major: false },
  { key: "IR-DaG", label: "Irregular dots/globules", major: false },
  { key: "BWV", label: "Blue-whitish veil", major: true },
  { key: "IR-VS", label: "Irregular vascular structures", major: true },
] as const;

export type AttributeMode = "absent" | "present" | "slider";

export interface AttributeInput {
  mode: AttributeMode;
  sliderValue: number; // used only in slider mode, in [0, 1]
}

export interface ChecklistState {
  attributes: AttributeInput[];
  whatIfThreshold: number | null; // client-side marker only, never sent
}

export function initialState(): ChecklistState {
  return {
    attributes: ATTRIBUTES.map(() => ({ mode: "absent", sliderValue: 0.5 })),
    whatIfThreshold: null,
  };
}

/** The 7-vector the API consumes. */
export function toAttrsVector(state: ChecklistState): number[] {
  return state.attributes.map((a) => {
    if (a.mode === "absent") return 0;
    if (a.mode === "present") return 1;
    return clamp01(a.sliderValue);
  });
}

function clamp01(x: number): number {
  return Math.min(1, Math.max(0, x));
}

// Fragment format: a=<v0>,<v1>,...,<v6>[&t=<threshold>] where v is 0, 1, or
// a slider value prefixed with "s" (e.g. s0.35).

export function encodeFragment(state: ChecklistState): string {
  const parts = state.attributes.map((a) => {
    if (a.mode === "absent") return "0";
    if (a.mode === "present") return "1";
    return `s${a.sliderValue.toFixed(3)}`;
  });
  let fragment = `a=${parts.join(",")}`;
  if (state.whatIfThreshold !== null) {
    fragment += `&t=${state.whatIfThreshold.toFixed(3)}`;
  }
  return fragment;
}

export function decodeFragment(fragment: string): ChecklistState {
  const state = initialState();
  const params = new URLSearchParams(fragment.replace(/^#/, ""));
  const attrs = params.get("a");
  if (attrs) {
    const parts = attrs.split(",");
    for (let i = 0; i < Math.min(parts.length, state.attributes.length); i++) {
      const token = parts[i] ?? "0";
      if (token === "1") {
        state.attributes[i] = { mode: "present", sliderValue: 0.5 };
      } else if (token.startsWith("s")) {
        const value = Number(token.slice(1));
        if (Number.isFinite(value)) {
          state.attributes[i] = { mode: "slider", sliderValue: clamp01(value) };
        }
      }
    }
  }
  const threshold = params.get("t");
  if (threshold !== null) {
    const value = Number(threshold);
    if (Number.isFinite(value)) {
      state.whatIfThreshold = clamp01(value);
    }
  }
  return state;
}
