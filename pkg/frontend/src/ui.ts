// DOM rendering. Everything interesting lives in the view model; this file
// only maps TranscriptEntry records to elements and wires the form controls.

import { EngineClient } from "./api.js";
import { Attachment, ChatViewModel, TranscriptEntry } from "./viewmodel.js";

function attachmentNode(attachment: Attachment): HTMLElement {
  const holder = document.createElement("figure");
  holder.className = `attachment attachment-${attachment.kind}`;
  const img = document.createElement("img");
  // videos get a static poster frame, no playback pipeline
  img.src = URL.createObjectURL(attachment.blob);
  img.alt = attachment.name;
  const caption = document.createElement("figcaption");
  caption.textContent = attachment.name;
  holder.append(img, caption);
  return holder;
}

function entryNode(entry: TranscriptEntry): HTMLElement {
  if (entry.kind === "notice") {
    const div = document.createElement("div");
    div.className = "notice";
    div.textContent = entry.text;
    return div;
  }
  if (entry.kind === "reasoning") {
    const details = document.createElement("details");
    details.className = "reasoning gray";
    details.open = !entry.collapsed;
    const summary = document.createElement("summary");
    summary.textContent = `step ${entry.step}: ${entry.label}`;
    const body = document.createElement("pre");
    body.textContent = entry.body;
    details.append(summary, body);
    return details;
  }
  const div = document.createElement("div");
  div.className = `bubble bubble-${entry.role}`;
  for (const attachment of entry.attachments) {
    div.append(attachmentNode(attachment));
  }
  const text = document.createElement("p");
  text.textContent = entry.text;
  div.append(text);
  return div;
}

export function render(model: ChatViewModel, transcript: HTMLElement): void {
  transcript.replaceChildren(...model.renderEntries().map(entryNode));
  transcript.scrollTop = transcript.scrollHeight;
}

export async function mount(root: HTMLElement, baseUrl = ""): Promise<ChatViewModel> {
  const client = new EngineClient(baseUrl);
  const sessionId = await client.createSession();
  const model = new ChatViewModel(client, sessionId);

  root.innerHTML = `
    <div class="transcript"></div>
    <form class="composer">
      <label class="toggle"><input type="checkbox" name="reasoning"> show reasoning</label>
      <input type="file" name="attachments" accept="image/*,video/*" multiple>
      <input type="text" name="text" placeholder="Ask about your media" autocomplete="off">
      <button type="submit">Send</button>
    </form>
  `;
  const transcript = root.querySelector<HTMLElement>(".transcript")!;
  const form = root.querySelector<HTMLFormElement>(".composer")!;
  const textInput = form.elements.namedItem("text") as HTMLInputElement;
  const fileInput = form.elements.namedItem("attachments") as HTMLInputElement;
  const toggle = form.elements.namedItem("reasoning") as HTMLInputElement;

  toggle.addEventListener("change", () => {
    model.toggleReasoning();
    render(model, transcript);
  });
  fileInput.addEventListener("change", () => {
    for (const file of fileInput.files ?? []) {
      model.stageAttachment(file.name, file);
    }
    fileInput.value = "";
  });
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = textInput.value.trim();
    if (text === "") return;
    const ticker = setInterval(() => render(model, transcript), 200);
    void model.sendTurn(text).then((sent) => {
      clearInterval(ticker);
      if (sent) textInput.value = "";
      render(model, transcript);
    });
    render(model, transcript);
  });

  render(model, transcript);
  return model;
}
