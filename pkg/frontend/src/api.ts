// Typed client for the what-if service. Every number shown in the UI comes
// from these responses; the client does no math.

export type NodeInfo = {
    name: string
    kind: string
    states: string[]
    parents: string[]
}

export type SessionInfo = {
    session_id: string
    name: string
    nodes: NodeInfo[]
}

export type StateProbability = {
    state: string
    probability: number
}

export type PosteriorsResponse = {
    method: string
    posteriors: Record<string, StateProbability[]>
}

export type ContinuousEvidence = {
    node: string
    value: number
    bandwidth: number
}

export type EvidenceView = {
    discrete: Record<string, string>
    continuous: ContinuousEvidence | null
}

export type Histogram = {
    edges: number[]
    counts: number[]
}

export type ForecastResponse = {
    n: number
    seed: number
    mean: number
    ci: [number, number]
    histogram: Histogram
    evidence: EvidenceView
}

export type Weights = {
    price: number
    promotions: number
    location: number
}

export type WeightsResponse = {
    weights: Weights
    analytic_mean: number
}

export class ApiError extends Error {
    constructor(public status: number, public detail: string) {
        super(`${status}: ${detail}`)
    }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await fetch(url, {
        headers: { 'Content-Type': 'application/json' },
        ...init,
    })
    if (!response.ok) {
        let detail = response.statusText
        try {
            const body = await response.json()
            if (body && typeof body.detail === 'string') detail = body.detail
            else if (body && body.detail) detail = JSON.stringify(body.detail)
        } catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(response.status, detail)
    }
    return (await response.json()) as T
}

export class ApiClient {
    constructor(public baseUrl: string) {
        this.baseUrl = baseUrl.replace(/\/+$/, '')
    }

    createSession(dsl: string, seed?: number): Promise<SessionInfo> {
        return request(`${this.baseUrl}/sessions`, {
            method: 'POST',
            body: JSON.stringify(seed === undefined ? { dsl } : { dsl, seed }),
        })
    }

    setEvidence(
        sessionId: string,
        body: { node: string; state: string } | { node: string; value: number; bandwidth?: number },
    ): Promise<EvidenceView> {
        return request(`${this.baseUrl}/sessions/${sessionId}/evidence`, {
            method: 'POST',
            body: JSON.stringify(body),
        })
    }

    clearEvidence(sessionId: string): Promise<EvidenceView> {
        return request(`${this.baseUrl}/sessions/${sessionId}/evidence`, {
            method: 'DELETE',
        })
    }

    getPosteriors(sessionId: string, method?: string): Promise<PosteriorsResponse> {
        const query = method ? `?method=${encodeURIComponent(method)}` : ''
        return request(`${this.baseUrl}/sessions/${sessionId}/posteriors${query}`)
    }

    getForecast(sessionId: string, n?: number, seed?: number): Promise<ForecastResponse> {
        const params = new URLSearchParams()
        if (n !== undefined) params.set('n', String(n))
        if (seed !== undefined) params.set('seed', String(seed))
        const query = params.size ? `?${params}` : ''
        return request(`${this.baseUrl}/sessions/${sessionId}/forecast${query}`)
    }

    setWeights(sessionId: string, weights: Weights): Promise<WeightsResponse> {
        return request(`${this.baseUrl}/sessions/${sessionId}/weights`, {
            method: 'POST',
            body: JSON.stringify(weights),
        })
    }
}
