// Wire types for the recognition service's JSON API.
export {};
