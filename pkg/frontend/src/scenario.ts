// Scenario snapshots and pinned-comparison math. A snapshot is a verbatim
// copy of the server responses that back the current view.

import type { EvidenceView, ForecastResponse, PosteriorsResponse, Weights } from './api.js'

export type Snapshot = {
    evidence: EvidenceView
    posteriors: PosteriorsResponse
    forecast: ForecastResponse
    weights: Weights
}

export type StateDelta = {
    state: string
    pinned: number
    current: number
    delta: number
}

export function posteriorDeltas(
    pinned: PosteriorsResponse,
    current: PosteriorsResponse,
): Record<string, StateDelta[]> {
    const out: Record<string, StateDelta[]> = {}
    for (const [node, entries] of Object.entries(current.posteriors)) {
        const before = new Map(
            (pinned.posteriors[node] ?? []).map((e) => [e.state, e.probability]),
        )
        out[node] = entries.map((e) => {
            const p = before.get(e.state) ?? 0
            return { state: e.state, pinned: p, current: e.probability, delta: e.probability - p }
        })
    }
    return out
}

export function meanDelta(pinned: ForecastResponse, current: ForecastResponse): number {
    return current.mean - pinned.mean
}

export function ciOverlap(a: [number, number], b: [number, number]): boolean {
    return a[0] <= b[1] && b[0] <= a[1]
}

export function cloneSnapshot(snapshot: Snapshot): Snapshot {
    return JSON.parse(JSON.stringify(snapshot)) as Snapshot
}
