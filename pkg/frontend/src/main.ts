/** Browser bootstrap: render on every state change and translate DOM
 * events into controller calls. Everything testable lives in the other
 * modules; this file only wires them to the document. */

import { ApiClient, EditPayload } from "./api.js";
import { SessionController } from "./controller.js";
import { renderApp } from "./render.js";

function mount(root: HTMLElement, baseUrl: string): SessionController {
  const controller: SessionController = new SessionController(
    new ApiClient(baseUrl),
    (state) => {
      root.innerHTML = renderApp(state);
    },
  );

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const region = target.closest<HTMLElement>("li.region");
    if (region?.dataset.ref) {
      void controller.openRegion(region.dataset.ref);
      return;
    }
    if (target.matches("button.prev")) {
      controller.browse(-1);
    } else if (target.matches("button.next")) {
      controller.browse(1);
    } else if (target.matches("button.accept")) {
      void controller.accept();
    } else if (target.matches("button.ignore")) {
      void controller.ignore();
    } else if (target.closest(".toast")) {
      controller.dismissToast();
    }
  });

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("textarea.after")) {
      controller.editDraft((target as HTMLTextAreaElement).value);
    } else if (target.matches("input.prompt")) {
      controller.setPrompt((target as HTMLInputElement).value);
    }
  });

  void controller.checkHealth();
  return controller;
}

declare global {
  interface Window {
    editrec?: {
      controller: SessionController;
      recordEdit: (edit: EditPayload) => Promise<void>;
    };
  }
}

const root = document.getElementById("app");
if (root) {
  const controller = mount(root, "");
  // Expose a hook so an embedding editor can push edit events in.
  window.editrec = {
    controller,
    recordEdit: (edit) => controller.triggerRecommendation(edit),
  };
}
