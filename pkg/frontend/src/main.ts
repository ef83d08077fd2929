/**
 * Bootstrap: read state from the URL, wire controller to DOM, keep the
 * location bar in sync so every view is shareable.
 */

import { ApiClient } from "./api";
import { Explorer } from "./explorer";
import { renderView } from "./render";
import { parseState, serializeState } from "./state";

function syncUrl(query: string): void {
  const url = `${window.location.pathname}${query ? "?" + query : ""}`;
  window.history.pushState(null, "", url);
}

export function boot(root: HTMLElement): Explorer {
  const api = new ApiClient();
  const explorer = new Explorer(api, parseState(window.location.search));

  explorer.onChange((view) => {
    syncUrl(serializeState(view.state));
    root.replaceChildren(
      renderView(view, {
        onToggle: (field, value) =>
          void explorer.apply({ kind: "toggle-facet", field, value }),
        onSelect: (ticketId) => void explorer.inspect(ticketId),
      })
    );
  });

  const search = document.querySelector<HTMLInputElement>("#search-box");
  search?.addEventListener("change", () =>
    void explorer.apply({ kind: "set-terms", text: search.value })
  );
  document
    .querySelector("#back-button")
    ?.addEventListener("click", () => void explorer.back());
  window.addEventListener("popstate", () => void explorer.back());

  void explorer.refresh();
  return explorer;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app") as HTMLElement);
}
