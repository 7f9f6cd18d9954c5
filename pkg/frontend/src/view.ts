import { ApiClient } from "./api.js";
import { buildChartModel, CHART_ATTRIBUTES, renderChartSVG } from "./chart.js";
import { ExplorerController, type ViewState } from "./controller.js";
import type { Layout, TileState } from "./types.js";

const LAYOUTS: Layout[] = ["strip", "grid", "wipe"];

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

function fmt(value: number, digits = 4): string {
  return Number(value).toFixed(digits);
}

/** Thin DOM layer: renders the controller's state, never computes numbers. */
export class ExplorerView {
  private root: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly controller: ExplorerController,
    private readonly api: ApiClient,
  ) {
    this.root = root;
    controller.subscribe((state) => this.render(state));
  }

  mount(): void {
    this.render(this.controller.getState());
  }

  private render(state: ViewState): void {
    this.root.textContent = "";
    if (state.banner) {
      const banner = el("div", "banner", state.banner);
      const dismiss = el("button", "dismiss", "dismiss");
      dismiss.onclick = () => this.controller.dismissBanner();
      banner.appendChild(dismiss);
      this.root.appendChild(banner);
    }
    this.root.appendChild(this.renderControls(state));
    if (state.session) {
      this.root.appendChild(this.renderComparison(state));
      this.root.appendChild(this.renderCharts(state));
    } else {
      this.root.appendChild(el("p", "hint", "Upload a PNG or JPEG image to begin."));
    }
  }

  private renderControls(state: ViewState): HTMLElement {
    const bar = el("div", "controls");

    const upload = el("input") as HTMLInputElement;
    upload.type = "file";
    upload.accept = "image/png,image/jpeg";
    upload.onchange = () => {
      const file = upload.files?.[0];
      if (file) void this.controller.upload(file, file.name);
    };
    bar.appendChild(upload);

    const slider = el("input", "level-slider") as HTMLInputElement;
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(state.level);
    slider.disabled = !state.session;
    slider.oninput = () => this.controller.setLevel(Number(slider.value));
    const sliderWrap = el("label", "slider-wrap", `target level ${fmt(state.level, 2)} `);
    sliderWrap.appendChild(slider);
    bar.appendChild(sliderWrap);

    const checklist = el("span", "filter-checklist");
    for (const filter of state.filters) {
      const label = el("label", "filter-toggle");
      const box = el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.checked = state.selected.includes(filter.id);
      box.disabled = !state.session;
      box.onchange = () => this.controller.toggleFilter(filter.id);
      label.appendChild(box);
      label.appendChild(document.createTextNode(filter.id));
      checklist.appendChild(label);
    }
    bar.appendChild(checklist);

    const layoutWrap = el("span", "layout-switch");
    for (const layout of LAYOUTS) {
      const btn = el("button", state.layout === layout ? "active" : "", layout);
      btn.onclick = () => this.controller.setLayout(layout);
      layoutWrap.appendChild(btn);
    }
    bar.appendChild(layoutWrap);
    return bar;
  }

  private renderComparison(state: ViewState): HTMLElement {
    const panel = el("div", `comparison layout-${state.layout}`);
    if (state.originalUrl) {
      const tile = el("figure", "tile original");
      const img = el("img") as HTMLImageElement;
      img.src = state.originalUrl;
      tile.appendChild(img);
      tile.appendChild(el("figcaption", "caption", "original"));
      panel.appendChild(tile);
    }
    if (state.layout === "wipe" && state.tiles.length >= 1) {
      panel.appendChild(this.renderWipe(state));
      return panel;
    }
    for (const tile of state.tiles) {
      panel.appendChild(this.renderTile(tile));
    }
    return panel;
  }

  private renderTile(tile: TileState): HTMLElement {
    const fig = el("figure", `tile tile-${tile.status}`);
    if (tile.status === "loading") {
      fig.appendChild(el("div", "spinner", "computing..."));
      fig.appendChild(el("figcaption", "caption", tile.filterId));
      return fig;
    }
    if (tile.status === "error" || !tile.response) {
      fig.appendChild(el("div", "error-tile", tile.error ?? "failed"));
      fig.appendChild(el("figcaption", "caption", tile.filterId));
      return fig;
    }
    const { match, report, image_url } = tile.response;
    const img = el("img") as HTMLImageElement;
    img.src = this.api.absolute(image_url);
    fig.appendChild(img);

    const badge = match.converged
      ? el("span", "badge ok", `matched ±${fmt(match.deviation)}`)
      : el("span", "badge warn", `off target: reached ${fmt(match.achieved_level, 3)}`);
    fig.appendChild(badge);

    const caption = el("figcaption", "caption");
    caption.appendChild(el("strong", "", tile.filterId));
    caption.appendChild(
      el("span", "param", ` param ${fmt(match.param)} (norm ${fmt(match.normalized_param, 3)})`),
    );
    caption.appendChild(el("span", "level", ` level ${fmt(match.achieved_level, 3)}`));
    const attrs = el("dl", "attrs");
    const entries: [string, number][] = [
      ["SO", report.so],
      ["SO_S", report.so_smooth],
      ["SO_E", report.so_edge],
      ["brightness", report.delta_l],
      ["color", report.delta_c],
      ["contrast", report.contrast_ratio],
    ];
    for (const [name, value] of entries) {
      attrs.appendChild(el("dt", "", name));
      attrs.appendChild(el("dd", "", fmt(value)));
    }
    caption.appendChild(attrs);
    fig.appendChild(caption);
    return fig;
  }

  private renderWipe(state: ViewState): HTMLElement {
    const wrap = el("div", "wipe-wrap");
    const ready = state.tiles.filter((t: TileState) => t.status === "ready" && t.response);
    const left = ready[0];
    const right = ready[1];
    if (!left) {
      wrap.appendChild(el("p", "hint", "waiting for results..."));
      return wrap;
    }
    const base = el("div", "wipe-stack");
    const imgA = el("img", "wipe-under") as HTMLImageElement;
    imgA.src = this.api.absolute(left.response!.image_url);
    base.appendChild(imgA);
    const overlay = el("div", "wipe-overlay");
    const imgB = el("img") as HTMLImageElement;
    imgB.src = right?.response
      ? this.api.absolute(right.response.image_url)
      : state.originalUrl ?? "";
    overlay.appendChild(imgB);
    base.appendChild(overlay);
    const slider = el("input", "wipe-slider") as HTMLInputElement;
    slider.type = "range";
    slider.min = "0";
    slider.max = "100";
    slider.value = "50";
    overlay.style.width = "50%";
    slider.oninput = () => {
      overlay.style.width = `${slider.value}%`;
    };
    wrap.appendChild(base);
    wrap.appendChild(slider);
    wrap.appendChild(
      el("p", "caption", `${left.filterId} (under) vs ${right ? right.filterId : "original"} (wipe)`),
    );
    return wrap;
  }

  private renderCharts(state: ViewState): HTMLElement {
    const section = el("div", "charts");
    const model = buildChartModel(state.fetched, state.selected);
    for (const attribute of CHART_ATTRIBUTES) {
      const holder = el("div", "chart-holder");
      holder.innerHTML = renderChartSVG(model, attribute);
      section.appendChild(holder);
    }
    return section;
  }
}
