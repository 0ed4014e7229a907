/** Session id lives in the URL fragment so co-creation sessions are bookmarkable. */

export function sessionFromFragment(hash: string): string | null {
  const m = /^#session=([A-Za-z0-9-]+)$/.exec(hash);
  return m ? m[1] : null;
}

export function fragmentForSession(sessionId: string): string {
  return `#session=${sessionId}`;
}
