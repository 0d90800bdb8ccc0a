/** Browser entrypoint: mount the app on #app against the same origin
 * (override with ?api=http://host:port for development). */

import { mountApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";
mountApp(document.getElementById("app")!, { baseUrl });
