/** Trailing-edge debouncer keyed per control, so each slider/button serializes
 * its own requests while different controls stay independent. */
export class Debouncer<K> {
  private handles = new Map<K, ReturnType<typeof setTimeout>>();

  constructor(private delayMs = 250) {}

  run(key: K, op: () => void): void {
    const prev = this.handles.get(key);
    if (prev !== undefined) clearTimeout(prev);
    this.handles.set(
      key,
      setTimeout(() => {
        this.handles.delete(key);
        op();
      }, this.delayMs),
    );
  }

  cancel(key: K): void {
    const prev = this.handles.get(key);
    if (prev !== undefined) {
      clearTimeout(prev);
      this.handles.delete(key);
    }
  }
}
