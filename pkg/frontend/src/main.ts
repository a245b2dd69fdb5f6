import { mount } from "./app.js";

void mount(document);
