import { ApiClient } from "./api.js";
import { ExplorerController } from "./controller.js";
import { ExplorerView } from "./view.js";

const api = new ApiClient("");
const controller = new ExplorerController(api);
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
const view = new ExplorerView(root, controller, api);
view.mount();
void controller.loadFilters();
