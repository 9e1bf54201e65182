/** Session id persistence across page loads. */

const STORAGE_KEY = "apr.session_id";

// the subset of window.localStorage the app needs; injectable for tests
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class SessionKeeper {
  private readonly store: KeyValueStore;

  constructor(store: KeyValueStore) {
    this.store = store;
  }

  current(): string | null {
    const id = this.store.getItem(STORAGE_KEY);
    return id !== null && id.length > 0 ? id : null;
  }

  remember(id: string): void {
    this.store.setItem(STORAGE_KEY, id);
  }

  forget(): void {
    this.store.removeItem(STORAGE_KEY);
  }
}

/** In-memory stand-in with the same surface as window.localStorage. */
export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    const value = this.data.get(key);
    return value === undefined ? null : value;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}
