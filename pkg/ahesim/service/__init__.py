from .app import create_app, SearchRequest, SearchResponse
from .client import SearchClient
