// Session state machine. Views update only from server responses: every
// mutation posts, then refetches posteriors and forecast, and the snapshot
// swaps in atomically. A failed request leaves the snapshot untouched and
// sets an error banner instead.

import { ApiClient, ApiError } from './api.js'
import type { SessionInfo, Weights } from './api.js'
import { cloneSnapshot } from './scenario.js'
import type { Snapshot } from './scenario.js'
import { DEFAULT_WEIGHTS } from './weights.js'

export type Listener = (store: ScenarioStore) => void

export class ScenarioStore {
    session: SessionInfo | null = null
    snapshot: Snapshot | null = null
    pinned: Snapshot | null = null
    error: string | null = null
    busy = false

    private weights: Weights = { ...DEFAULT_WEIGHTS }
    private listeners: Listener[] = []

    constructor(
        private api: ApiClient,
        private forecastN = 10_000,
    ) {}

    subscribe(listener: Listener): void {
        this.listeners.push(listener)
    }

    private emit(): void {
        for (const listener of this.listeners) listener(this)
    }

    private async mutate(action: () => Promise<void>): Promise<void> {
        this.busy = true
        this.error = null
        this.emit()
        try {
            await action()
        } catch (err) {
            this.error = err instanceof ApiError ? err.detail : String(err)
        } finally {
            this.busy = false
            this.emit()
        }
    }

    async start(dsl: string, seed?: number): Promise<void> {
        await this.mutate(async () => {
            this.session = await this.api.createSession(dsl, seed)
            this.pinned = null
            this.weights = { ...DEFAULT_WEIGHTS }
            await this.refreshSnapshot()
        })
    }

    private get sessionId(): string {
        if (!this.session) throw new ApiError(0, 'no live session')
        return this.session.session_id
    }

    private async refreshSnapshot(): Promise<void> {
        const id = this.sessionId
        const posteriors = await this.api.getPosteriors(id)
        const forecast = await this.api.getForecast(id, this.forecastN)
        this.snapshot = {
            evidence: forecast.evidence,
            posteriors,
            forecast,
            weights: { ...this.weights },
        }
    }

    async applyEvidence(
        body: { node: string; state: string } | { node: string; value: number; bandwidth?: number },
    ): Promise<void> {
        await this.mutate(async () => {
            await this.api.setEvidence(this.sessionId, body)
            await this.refreshSnapshot()
        })
    }

    async clearEvidence(): Promise<void> {
        await this.mutate(async () => {
            await this.api.clearEvidence(this.sessionId)
            await this.refreshSnapshot()
        })
    }

    async adjustWeights(weights: Weights): Promise<void> {
        await this.mutate(async () => {
            await this.api.setWeights(this.sessionId, weights)
            this.weights = { ...weights }
            await this.refreshSnapshot()
        })
    }

    pinCurrent(): void {
        if (this.snapshot) {
            this.pinned = cloneSnapshot(this.snapshot)
            this.emit()
        }
    }

    unpin(): void {
        this.pinned = null
        this.emit()
    }
}
