// Application wiring: state transitions, API calls, URL fragment sync.

import { ApiClient, ApiValidationError } from "./api.js";
import {
  decodeFragment,
  encodeFragment,
  initialState,
  toAttrsVector,
  type AttributeMode,
  type ChecklistState,
} from "./state.js";
import {
  buildLayout,
  renderComparison,
  renderFieldErrors,
  renderForm,
  renderOffline,
  renderWeights,
  type ViewHandles,
} from "./view.js";

export class ChecklistApp {
  state: ChecklistState;
  private handles: ViewHandles;
  private requestSeq = 0;

  constructor(
    root: HTMLElement,
    private api: ApiClient,
    private onFragmentChange: (fragment: string) => void = () => {},
  ) {
    this.state = initialState();
    this.handles = buildLayout(root);
  }

  async start(fragment: string = ""): Promise<void> {
    if (fragment) {
      this.state = decodeFragment(fragment);
    }
    this.renderInputs();
    try {
      const weights = await this.api.getWeights();
      renderWeights(this.handles, weights);
      renderOffline(this.handles, false);
    } catch {
      renderOffline(this.handles, true);
      return;
    }
    await this.submit();
  }

  private renderInputs(): void {
    renderForm(this.handles, this.state, {
      onModeChange: (index, mode) => this.setMode(index, mode),
      onSliderChange: (index, value) => this.setSlider(index, value),
      onWhatIfChange: (value) => this.setWhatIf(value),
    });
  }

  setMode(index: number, mode: AttributeMode): void {
    this.state.attributes[index]!.mode = mode;
    this.renderInputs();
    void this.submit();
  }

  setSlider(index: number, value: number): void {
    this.state.attributes[index]!.sliderValue = value;
    if (this.state.attributes[index]!.mode === "slider") {
      void this.submit();
    }
  }

  setWhatIf(value: number | null): void {
    this.state.whatIfThreshold = value;
    void this.submit();
  }

  /** POST the current attribute vector and render the response verbatim. */
  async submit(): Promise<void> {
    const seq = ++this.requestSeq;
    this.onFragmentChange(encodeFragment(this.state));
    try {
      const response = await this.api.score(toAttrsVector(this.state));
      if (seq !== this.requestSeq) {
        return; // a newer request superseded this one
      }
      renderFieldErrors(this.handles, []);
      renderOffline(this.handles, false);
      renderComparison(this.handles, response, this.state.whatIfThreshold);
    } catch (error) {
      if (seq !== this.requestSeq || (error instanceof DOMException && error.name === "AbortError")) {
        return;
      }
      if (error instanceof ApiValidationError) {
        renderFieldErrors(this.handles, error.errors.map((e) => `${e.field}: ${e.message}`));
        return;
      }
      renderOffline(this.handles, true);
    }
  }
}

export function mount(): void {
  const root = document.querySelector<HTMLElement>("#app");
  if (!root) {
    throw new Error("missing #app mount point");
  }
  const baseUrl = new URLSearchParams(window.location.search).get("api") ?? "http://127.0.0.1:8000";
  const app = new ChecklistApp(root, new ApiClient(baseUrl), (fragment) => {
    window.history.replaceState(null, "", `#${fragment}`);
  });
  void app.start(window.location.hash);
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.querySelector("#app")) {
  mount();
}
