import { afterEach, describe, expect, it, vi } from 'vitest'

import { ApiClient } from '../src/api.js'
import type { EvidenceView } from '../src/api.js'
import { ScenarioStore } from '../src/store.js'

const PRIORS = [
    { state: 'Catalogue', probability: 0.47 },
    { state: 'InStore', probability: 0.08 },
    { state: 'NoPromotion', probability: 0.45 },
]
const OBSERVED = [
    { state: 'Catalogue', probability: 0.0932 },
    { state: 'InStore', probability: 0.9068 },
    { state: 'NoPromotion', probability: 0.0 },
]

// Minimal stateful stand-in for the service: holds evidence, serves
// evidence-dependent posteriors/forecasts, and rejects unknown nodes.
function fakeService() {
    let evidence: EvidenceView = { discrete: {}, continuous: null }

    const handler = async (rawUrl: string, init?: RequestInit): Promise<Response> => {
        const url = new URL(rawUrl)
        const method = init?.method ?? 'GET'
        const body = init?.body ? JSON.parse(String(init.body)) : undefined
        const json = (status: number, payload: unknown) =>
            new Response(JSON.stringify(payload), { status })

        if (method === 'POST' && url.pathname === '/sessions') {
            return json(201, {
                session_id: 'sess',
                name: 'promo-sales',
                nodes: [
                    {
                        name: 'Promotions',
                        kind: 'chance',
                        states: ['Catalogue', 'InStore', 'NoPromotion'],
                        parents: [],
                    },
                    { name: 'Sales', kind: 'equation', states: [], parents: ['Promotions'] },
                ],
            })
        }
        if (method === 'POST' && url.pathname === '/sessions/sess/evidence') {
            if (body.node === 'Ghost') return json(400, { detail: 'unknown node Ghost' })
            if (body.state !== undefined) evidence.discrete[body.node] = body.state
            else evidence.continuous = { node: body.node, value: body.value, bandwidth: 5 }
            return json(200, evidence)
        }
        if (method === 'DELETE' && url.pathname === '/sessions/sess/evidence') {
            evidence = { discrete: {}, continuous: null }
            return json(200, evidence)
        }
        if (url.pathname === '/sessions/sess/posteriors') {
            const observed = evidence.continuous !== null
            return json(200, {
                method: observed ? 'convolution-density' : 'exact-enumeration',
                posteriors: { Promotions: observed ? OBSERVED : PRIORS },
            })
        }
        if (url.pathname === '/sessions/sess/forecast') {
            const clamped = evidence.discrete['Promotions'] === 'Catalogue'
            return json(200, {
                n: Number(url.searchParams.get('n') ?? 10000),
                seed: 42,
                mean: clamped ? 326.49 : 168.45,
                ci: clamped ? [325.34, 327.54] : [162.72, 168.82],
                histogram: { edges: [0, 1, 2], counts: [3, 4] },
                evidence,
            })
        }
        if (method === 'POST' && url.pathname === '/sessions/sess/weights') {
            return json(200, { weights: body, analytic_mean: 168.4528 })
        }
        return json(404, { detail: `unhandled ${method} ${url.pathname}` })
    }

    vi.stubGlobal('fetch', handler)
}

afterEach(() => vi.unstubAllGlobals())

async function startedStore(): Promise<ScenarioStore> {
    fakeService()
    const store = new ScenarioStore(new ApiClient('http://svc'))
    await store.start('network "promo-sales" { ... }')
    return store
}

describe('ScenarioStore', () => {
    it('boots with priors and an unclamped forecast from the server', async () => {
        const store = await startedStore()
        expect(store.error).toBeNull()
        expect(store.snapshot?.posteriors.posteriors.Promotions).toEqual(PRIORS)
        expect(store.snapshot?.forecast.mean).toBe(168.45)
    })

    it('applyEvidence swaps in exactly the server payloads', async () => {
        const store = await startedStore()
        await store.applyEvidence({ node: 'Sales', value: 175 })
        expect(store.snapshot?.posteriors.method).toBe('convolution-density')
        expect(store.snapshot?.posteriors.posteriors.Promotions).toEqual(OBSERVED)
        expect(store.snapshot?.evidence.continuous?.value).toBe(175)
    })

    it('apply then clear restores the initial snapshot', async () => {
        const store = await startedStore()
        const initial = JSON.parse(JSON.stringify(store.snapshot))
        await store.applyEvidence({ node: 'Sales', value: 175 })
        await store.clearEvidence()
        expect(store.snapshot).toEqual(initial)
    })

    it('a rejected mutation sets the banner and leaves the view unchanged', async () => {
        const store = await startedStore()
        const before = JSON.parse(JSON.stringify(store.snapshot))
        await store.applyEvidence({ node: 'Ghost', state: 'X' })
        expect(store.error).toContain('Ghost')
        expect(store.snapshot).toEqual(before)
    })

    it('clamping updates the forecast from the server', async () => {
        const store = await startedStore()
        await store.applyEvidence({ node: 'Promotions', state: 'Catalogue' })
        expect(store.snapshot?.forecast.mean).toBe(326.49)
        expect(store.snapshot?.forecast.ci).toEqual([325.34, 327.54])
    })

    it('pinning freezes a deep copy for comparison', async () => {
        const store = await startedStore()
        store.pinCurrent()
        await store.applyEvidence({ node: 'Promotions', state: 'Catalogue' })
        expect(store.pinned?.forecast.mean).toBe(168.45)
        expect(store.snapshot?.forecast.mean).toBe(326.49)
        store.unpin()
        expect(store.pinned).toBeNull()
    })

    it('adjustWeights posts and refetches; numbers stay server-sourced', async () => {
        const store = await startedStore()
        await store.adjustWeights({ price: 0.25, promotions: 0.3, location: 0.45 })
        expect(store.error).toBeNull()
        expect(store.snapshot?.weights).toEqual({ price: 0.25, promotions: 0.3, location: 0.45 })
        expect(store.snapshot?.forecast.mean).toBe(168.45)
    })

    it('notifies subscribers on every state change', async () => {
        fakeService()
        const store = new ScenarioStore(new ApiClient('http://svc'))
        let calls = 0
        store.subscribe(() => calls++)
        await store.start('x')
        expect(calls).toBeGreaterThanOrEqual(2) // busy + settled
    })
})
