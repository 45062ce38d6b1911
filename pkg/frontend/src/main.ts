import { ApiClient } from './api.js'
import { PosteriorBars } from './components/bars.js'
import { EvidencePanel } from './components/evidence.js'
import { ForecastHistogram } from './components/histogram.js'
import { WeightSliders } from './components/sliders.js'
import { formatNumber, formatSigned } from './format.js'
import { DEFAULT_MODEL } from './model.js'
import { ciOverlap, meanDelta, posteriorDeltas } from './scenario.js'
import { ScenarioStore } from './store.js'
import { DEFAULT_WEIGHTS } from './weights.js'

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag)
    if (className) node.className = className
    if (text !== undefined) node.textContent = text
    return node
}

function boot(): void {
    const app = document.getElementById('app')
    if (!app) throw new Error('missing #app container')

    const banner = el('div', 'banner hidden')
    const connect = el('form', 'connect')
    const urlInput = el('input') as HTMLInputElement
    urlInput.value = localStorage.getItem('promobn.baseUrl') ?? 'http://127.0.0.1:8080'
    const dslDetails = el('details')
    dslDetails.appendChild(el('summary', undefined, 'model text'))
    const dslArea = el('textarea') as HTMLTextAreaElement
    dslArea.rows = 12
    dslArea.value = DEFAULT_MODEL
    dslDetails.appendChild(dslArea)
    const startButton = el('button', undefined, 'start session')
    startButton.type = 'submit'
    connect.append(el('label', undefined, 'service'), urlInput, startButton, dslDetails)

    const main = el('div', 'panels hidden')
    const evidenceSection = el('section')
    evidenceSection.appendChild(el('h2', undefined, 'Evidence'))
    const posteriorSection = el('section')
    posteriorSection.appendChild(el('h2', undefined, 'Posteriors'))
    const forecastSection = el('section')
    forecastSection.appendChild(el('h2', undefined, 'Forecast'))
    const weightSection = el('section')
    weightSection.appendChild(el('h2', undefined, 'Weights'))
    const compareSection = el('section')
    compareSection.appendChild(el('h2', undefined, 'Compare'))
    main.append(evidenceSection, posteriorSection, forecastSection, weightSection, compareSection)
    app.append(banner, connect, main)

    let store = new ScenarioStore(new ApiClient(urlInput.value))
    const bars = new PosteriorBars()
    const histogram = new ForecastHistogram()
    const panel = new EvidencePanel(
        (body) => void store.applyEvidence(body),
        () => void store.clearEvidence(),
    )
    const sliders = new WeightSliders(DEFAULT_WEIGHTS, (w) => void store.adjustWeights(w))
    const pinButton = el('button', undefined, 'pin scenario')
    const unpinButton = el('button', undefined, 'unpin')
    const compareBody = el('div', 'compare-body')
    pinButton.addEventListener('click', () => store.pinCurrent())
    unpinButton.addEventListener('click', () => store.unpin())

    evidenceSection.appendChild(panel.root)
    posteriorSection.appendChild(bars.root)
    forecastSection.appendChild(histogram.root)
    weightSection.appendChild(sliders.root)
    compareSection.append(pinButton, unpinButton, compareBody)

    const render = () => {
        banner.classList.toggle('hidden', !store.error)
        banner.textContent = store.error ?? ''
        main.classList.toggle('hidden', !store.snapshot)
        document.body.classList.toggle('busy', store.busy)
        if (!store.session || !store.snapshot) return

        panel.renderControls(store.session.nodes)
        panel.renderChips(store.snapshot.evidence)
        const deltas = store.pinned
            ? posteriorDeltas(store.pinned.posteriors, store.snapshot.posteriors)
            : undefined
        bars.render(store.snapshot.posteriors, deltas)
        histogram.render(store.snapshot.forecast, store.pinned?.forecast.mean)
        sliders.setWeights(store.snapshot.weights)

        compareBody.replaceChildren()
        if (store.pinned) {
            const delta = meanDelta(store.pinned.forecast, store.snapshot.forecast)
            const line = el(
                'p',
                undefined,
                `forecast mean ${formatNumber(store.snapshot.forecast.mean)} vs pinned ` +
                    `${formatNumber(store.pinned.forecast.mean)} ` +
                    `(${formatSigned(delta)})`,
            )
            compareBody.appendChild(line)
            const overlap = ciOverlap(store.pinned.forecast.ci, store.snapshot.forecast.ci)
            compareBody.appendChild(
                el(
                    'p',
                    overlap ? 'muted' : 'highlight',
                    overlap
                        ? 'intervals overlap: means are statistically indistinguishable'
                        : 'intervals are disjoint: the change moved the forecast',
                ),
            )
        } else {
            compareBody.appendChild(el('p', 'muted', 'pin a scenario to compare against'))
        }
    }

    connect.addEventListener('submit', (e) => {
        e.preventDefault()
        localStorage.setItem('promobn.baseUrl', urlInput.value)
        store = new ScenarioStore(new ApiClient(urlInput.value))
        store.subscribe(render)
        void store.start(dslArea.value)
    })

    store.subscribe(render)
}

boot()
