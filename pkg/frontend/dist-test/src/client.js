// Service client: one in-flight /recognize at a time, newer calls
// cancel and supersede older ones.
export class SuperededError extends Error {
    constructor() {
        super("request superseded by a newer submission");
        this.name = "SuperededError";
    }
}
export class RecognizeClient {
    constructor(baseUrl, fetchFn = (u, i) => fetch(u, i)) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
        /** Total /recognize HTTP requests issued (used by tests). */
        this.requestCount = 0;
        this.controller = null;
    }
    async modelInfo() {
        const resp = await this.fetchFn(`${this.baseUrl}/model`);
        if (!resp.ok)
            throw new Error(`model info failed: ${resp.status}`);
        return (await resp.json());
    }
    async recognize(strokes) {
        if (this.controller)
            this.controller.abort();
        const controller = new AbortController();
        this.controller = controller;
        this.requestCount += 1;
        let resp;
        try {
            resp = await this.fetchFn(`${this.baseUrl}/recognize`, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify({ strokes }),
                signal: controller.signal,
            });
        }
        catch (err) {
            if (controller.signal.aborted)
                throw new SuperededError();
            throw err;
        }
        finally {
            if (this.controller === controller)
                this.controller = null;
        }
        if (!resp.ok) {
            const detail = await resp.text().catch(() => "");
            throw new Error(`recognize failed: ${resp.status} ${detail}`);
        }
        return (await resp.json());
    }
}
