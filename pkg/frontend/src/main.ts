import { boot } from "./ui.js";

boot().catch((err) => {
  console.error("hapticmap client failed to start:", err);
  const status = document.getElementById("status");
  if (status) status.textContent = String(err);
});
